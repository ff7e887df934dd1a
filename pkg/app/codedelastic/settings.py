import os
from pathlib import Path

from dotenv import load_dotenv

BASE_DIR = Path(__file__).resolve().parent.parent

load_dotenv(BASE_DIR.parent / ".env")

# ======================================================
# Basic Configuration
# ======================================================
SECRET_KEY = os.getenv("DJANGO_SECRET_KEY", "dev-key")
DEBUG = os.getenv("DJANGO_DEBUG", "False").lower() == "true"

ALLOWED_HOSTS = ["*"]

# ======================================================
# Installed Apps
# ======================================================
INSTALLED_APPS = [
    "django.contrib.contenttypes",
    "django.contrib.auth",

    "rest_framework",

    "core",
]

# ======================================================
# Database (PostgreSQL when configured, SQLite otherwise)
# ======================================================
if os.getenv("POSTGRES_HOST"):
    DATABASES = {
        "default": {
            "ENGINE": "django.db.backends.postgresql",
            "HOST": os.getenv("POSTGRES_HOST", "db"),
            "PORT": os.getenv("POSTGRES_PORT", "5432"),
            "NAME": os.getenv("POSTGRES_DB", "codedelastic"),
            "USER": os.getenv("POSTGRES_USER", "codedelastic"),
            "PASSWORD": os.getenv("POSTGRES_PASSWORD", "codedelastic"),
            "CONN_MAX_AGE": 60,
        }
    }
else:
    DATABASES = {
        "default": {
            "ENGINE": "django.db.backends.sqlite3",
            "NAME": os.getenv("SQLITE_PATH", str(BASE_DIR / "db.sqlite3")),
        }
    }

TIME_ZONE = "UTC"
USE_TZ = True

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"

# ======================================================
# Logging
# ======================================================
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO").upper()

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "tagged": {"format": "[%(name)s] %(levelname)s %(message)s"},
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "tagged",
        },
    },
    "loggers": {
        "core": {
            "handlers": ["console"],
            "level": LOG_LEVEL,
            "propagate": False,
        },
    },
}

# ======================================================
# Experiment defaults: square 2400^3 product, N in 20..40
# ======================================================
EXPERIMENT_DEFAULTS = {
    "u": int(os.getenv("EXP_U", "2400")),
    "w": int(os.getenv("EXP_W", "2400")),
    "v": int(os.getenv("EXP_V", "2400")),
    "cec_k": int(os.getenv("EXP_CEC_K", "10")),
    "cec_s": int(os.getenv("EXP_CEC_S", "20")),
    "mlcec_k": int(os.getenv("EXP_MLCEC_K", "10")),
    "mlcec_s": int(os.getenv("EXP_MLCEC_S", "20")),
    "mlcec_d": os.getenv("EXP_MLCEC_D", ""),
    "bicec_k": int(os.getenv("EXP_BICEC_K", "800")),
    "bicec_s": int(os.getenv("EXP_BICEC_S", "80")),
    "n_max": int(os.getenv("EXP_N_MAX", "40")),
    "n_min": int(os.getenv("EXP_N_MIN", "20")),
    "n_sweep": os.getenv("EXP_N_SWEEP", "20:40:2"),
    "trials": int(os.getenv("EXP_TRIALS", "20")),
    "straggler_prob": float(os.getenv("EXP_STRAGGLER_PROB", "0.5")),
    "slowdown": float(os.getenv("EXP_SLOWDOWN", "3")),
    # worker and master throughputs, multiply-add operations per second
    "base_rate": os.getenv("EXP_BASE_RATE", "5e8"),
    "decode_rate": os.getenv("EXP_DECODE_RATE", "8e9"),
    "notice_delay": float(os.getenv("EXP_NOTICE_DELAY", "0")),
    "seed": int(os.getenv("EXP_SEED", "0")),
    "output_dir": os.getenv("EXP_OUTPUT_DIR", "results"),
    "schemes": os.getenv("EXP_SCHEMES", "all"),
    "workers": int(os.getenv("EXP_WORKERS", "1")),
    "field": os.getenv("EXP_FIELD", "real"),
    "prime": int(os.getenv("EXP_PRIME", str(2**31 - 1))),
    "eval_points": os.getenv("EXP_EVAL_POINTS", "auto"),
    # transition demo (8 -> 6 -> 4 preemption sequence)
    "demo_n_max": int(os.getenv("EXP_DEMO_N_MAX", "8")),
    "demo_k": int(os.getenv("EXP_DEMO_K", "2")),
    "demo_s": int(os.getenv("EXP_DEMO_S", "4")),
    "demo_bicec_k": int(os.getenv("EXP_DEMO_BICEC_K", "600")),
    "demo_bicec_s": int(os.getenv("EXP_DEMO_BICEC_S", "300")),
    "demo_mlcec_d": os.getenv("EXP_DEMO_MLCEC_D", "2,2,3,4,4,5,6,6"),
    "demo_event_times": os.getenv("EXP_DEMO_EVENT_TIMES", "1.5,3.0"),
    # functional verification
    "verify_u": int(os.getenv("EXP_VERIFY_U", "120")),
    "verify_w": int(os.getenv("EXP_VERIFY_W", "96")),
    "verify_v": int(os.getenv("EXP_VERIFY_V", "150")),
    "verify_bicec_k": int(os.getenv("EXP_VERIFY_BICEC_K", "40")),
    "verify_bicec_s": int(os.getenv("EXP_VERIFY_BICEC_S", "4")),
}

# reciprocal condition estimate below which real-field decoding warns
CODEC_RCOND_THRESHOLD = float(os.getenv("CODEC_RCOND_THRESHOLD", "1e-10"))

SWEEP_PERSIST = os.getenv("SWEEP_PERSIST", "false").lower() in ("1", "true", "yes")
