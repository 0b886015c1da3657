"""Configuration management for the tangent field toolkit."""
import os
from dotenv import load_dotenv

load_dotenv()

class Config:
    """Toolkit configuration."""
    THREADS = max(1, int(os.getenv("TF_THREADS", "1")))
    LOG_LEVEL = os.getenv("TF_LOG_LEVEL", "INFO")

    # Haircut applied to the estimated uniform disconnectedness constant
    LAMBDA_SAFETY = float(os.getenv("TF_LAMBDA_SAFETY", "0.9"))

    # Window sampling step, as a fraction of the blowup ball radius r*R
    SAMPLE_FIDELITY = float(os.getenv("TF_SAMPLE_FIDELITY", "0.005"))

    # Tolerances, as fractions of the truncation radius R
    H_TOL = float(os.getenv("TF_H_TOL", "0.05"))
    WITNESS_TOL = float(os.getenv("TF_WITNESS_TOL", "0.08"))

    # Points closer than resolution * DEDUP_FRACTION are merged
    DEDUP_FRACTION = 0.01

    # Neighbourhood graph threshold and sphere slack, in multiples of resolution
    COMPONENT_SLACK = 3.0

    # Consecutive H blocks are BLOCK_RATIO apart (4**3); targets are traced
    # outside INNER_FRACTION * R
    BLOCK_RATIO = 64.0
    INNER_FRACTION = 1.0 / 32.0

config = Config()
