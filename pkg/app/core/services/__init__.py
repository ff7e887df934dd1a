"""
app/core/services
Domain modules: codec, allocation, simkernel, verify, harness, plots, config.
Import them by module (from core.services.codec import ...).
"""
