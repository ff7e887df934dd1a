from pathlib import Path

from rest_framework import serializers

from core.exceptions import InvalidParameterError
from core.services.allocation import DSequence, Scheme, SchemeParams
from core.services.codec import EvalPoints, Field, FieldKind, MatrixDims
from core.services.harness import MEASURED, DemoConfig, ExperimentConfig, VerifyConfig
from core.services.verify import measure_rate


def parse_int_list(raw: str) -> tuple:
    return tuple(int(x) for x in raw.replace(" ", "").split(",") if x)


def parse_n_sweep(raw: str) -> tuple:
    """`a:b:step` (inclusive) or a comma list."""
    raw = raw.strip()
    if ":" in raw:
        parts = [int(x) for x in raw.split(":")]
        if len(parts) not in (2, 3):
            raise ValueError(f"bad range {raw!r}")
        start, stop, step = parts[0], parts[1], parts[2] if len(parts) == 3 else 1
        if step < 1:
            raise ValueError("range step must be >= 1")
        return tuple(range(start, stop + 1, step))
    return parse_int_list(raw)


def parse_rate(value: str):
    """Positive ops/sec, or MEASURED."""
    if str(value).strip().lower() == MEASURED:
        return MEASURED
    try:
        rate = float(value)
    except ValueError:
        raise serializers.ValidationError(f"expected a number or '{MEASURED}'")
    if rate <= 0:
        raise serializers.ValidationError("must be positive")
    return rate


class ExperimentConfigSerializer(serializers.Serializer):
    u = serializers.IntegerField(min_value=1)
    w = serializers.IntegerField(min_value=1)
    v = serializers.IntegerField(min_value=1)

    cec_k = serializers.IntegerField(min_value=1)
    cec_s = serializers.IntegerField(min_value=1)
    mlcec_k = serializers.IntegerField(min_value=1)
    mlcec_s = serializers.IntegerField(min_value=1)
    mlcec_d = serializers.CharField(required=False, allow_blank=True, default="")
    bicec_k = serializers.IntegerField(min_value=1)
    bicec_s = serializers.IntegerField(min_value=1)
    n_max = serializers.IntegerField(min_value=1)
    n_min = serializers.IntegerField(min_value=1)
    n_sweep = serializers.CharField()

    trials = serializers.IntegerField(min_value=1)
    straggler_prob = serializers.FloatField(min_value=0.0, max_value=1.0)
    slowdown = serializers.FloatField(min_value=1.0)
    base_rate = serializers.CharField()
    decode_rate = serializers.CharField()
    notice_delay = serializers.FloatField(min_value=0.0, default=0.0)
    seed = serializers.IntegerField(min_value=0)
    output_dir = serializers.CharField()
    schemes = serializers.CharField(default="all")
    workers = serializers.IntegerField(min_value=1, default=1)
    field = serializers.ChoiceField(choices=[k.value for k in FieldKind], default=FieldKind.REAL.value)
    prime = serializers.IntegerField(min_value=3)
    eval_points = serializers.ChoiceField(choices=[p.value for p in EvalPoints], default=EvalPoints.AUTO.value)

    demo_n_max = serializers.IntegerField(min_value=1)
    demo_k = serializers.IntegerField(min_value=1)
    demo_s = serializers.IntegerField(min_value=1)
    demo_bicec_k = serializers.IntegerField(min_value=1)
    demo_bicec_s = serializers.IntegerField(min_value=1)
    demo_mlcec_d = serializers.CharField(allow_blank=True)
    demo_event_times = serializers.CharField(allow_blank=True)

    verify_u = serializers.IntegerField(min_value=1)
    verify_w = serializers.IntegerField(min_value=1)
    verify_v = serializers.IntegerField(min_value=1)
    verify_bicec_k = serializers.IntegerField(min_value=1)
    verify_bicec_s = serializers.IntegerField(min_value=1)

    def validate_base_rate(self, value):
        return parse_rate(value)

    def validate_decode_rate(self, value):
        return parse_rate(value)

    def validate_n_sweep(self, value):
        try:
            values = parse_n_sweep(value)
        except ValueError as exc:
            raise serializers.ValidationError(str(exc))
        if not values:
            raise serializers.ValidationError("no N values")
        return values

    def validate_schemes(self, value):
        value = value.strip().lower()
        if value == "all":
            return tuple(Scheme)
        try:
            return tuple(Scheme(s) for s in value.replace(" ", "").split(",") if s)
        except ValueError:
            raise serializers.ValidationError(f"unknown scheme in {value!r}; use cec, mlcec, bicec or all")

    def validate_mlcec_d(self, value):
        try:
            return parse_int_list(value) or None
        except ValueError:
            raise serializers.ValidationError("expected comma-separated integers")

    def validate_demo_mlcec_d(self, value):
        try:
            return parse_int_list(value) or None
        except ValueError:
            raise serializers.ValidationError("expected comma-separated integers")

    def validate_demo_event_times(self, value):
        try:
            times = tuple(float(x) for x in value.replace(" ", "").split(",") if x)
        except ValueError:
            raise serializers.ValidationError("expected comma-separated numbers")
        if any(t < 0 for t in times) or list(times) != sorted(times):
            raise serializers.ValidationError("event times must be nonnegative and nondecreasing")
        return times

    def validate(self, attrs):
        try:
            attrs["config"] = self._build(attrs)
        except InvalidParameterError as exc:
            raise serializers.ValidationError(str(exc))
        return attrs

    def create(self, validated_data):
        return validated_data["config"]

    def _build(self, a) -> ExperimentConfig:
        chosen = {
            Scheme.CEC: (a["cec_k"], a["cec_s"]),
            Scheme.MLCEC: (a["mlcec_k"], a["mlcec_s"]),
            Scheme.BICEC: (a["bicec_k"], a["bicec_s"]),
        }
        params = {
            s: SchemeParams(s, k, S, a["n_max"], a["n_min"])
            for s, (k, S) in chosen.items()
            if s in a["schemes"]
        }

        d = a.get("mlcec_d")
        if d is not None:
            DSequence(d).validate(len(d), a["mlcec_s"], a["mlcec_k"])
            if len(d) not in a["n_sweep"]:
                raise InvalidParameterError(f"mlcec_d has length {len(d)}, which is not in n_sweep")

        demo = DemoConfig(
            N_max=a["demo_n_max"],
            K=a["demo_k"],
            S=a["demo_s"],
            bicec_K=a["demo_bicec_k"],
            bicec_S=a["demo_bicec_s"],
            mlcec_d=a.get("demo_mlcec_d"),
            event_times=a["demo_event_times"],
        )
        if demo.N_min < 1:
            raise InvalidParameterError("demo timeline removes every worker")
        for scheme, k, S in ((Scheme.MLCEC, demo.K, demo.S), (Scheme.BICEC, demo.bicec_K, demo.bicec_S)):
            SchemeParams(scheme, k, S, demo.N_max, demo.N_min)
        if demo.mlcec_d is not None:
            DSequence(demo.mlcec_d).validate(demo.N_max, demo.S, demo.K)

        dims = MatrixDims(a["u"], a["w"], a["v"])
        base_rate = measure_rate(dims) if a["base_rate"] == MEASURED else a["base_rate"]

        arithmetic = Field.real() if a["field"] == FieldKind.REAL.value else Field.prime_field(a["prime"])
        return ExperimentConfig(
            dims=dims,
            params=params,
            n_sweep=a["n_sweep"],
            trials=a["trials"],
            straggler_prob=a["straggler_prob"],
            slowdown=a["slowdown"],
            base_rate=base_rate,
            decode_rate=a["decode_rate"],
            seed=a["seed"],
            output_dir=Path(a["output_dir"]),
            mlcec_d=d,
            notice_delay=a["notice_delay"],
            workers=a["workers"],
            arithmetic=arithmetic,
            eval_points=EvalPoints(a["eval_points"]),
            demo=demo,
            verify=VerifyConfig(
                dims=MatrixDims(a["verify_u"], a["verify_w"], a["verify_v"]),
                bicec_K=a["verify_bicec_k"],
                bicec_S=a["verify_bicec_s"],
            ),
        )
