"""
Configuration management for the SL(2,R) translator lab
"""
from pydantic_settings import BaseSettings, SettingsConfigDict
from pathlib import Path
import math


class Settings(BaseSettings):
    """Application settings loaded from environment variables (prefix SL2R_)"""

    model_config = SettingsConfigDict(
        env_prefix="SL2R_",
        env_file=".env",
        case_sensitive=False,
        extra="ignore",
    )

    # Parallelism
    num_threads: int = 1

    # Integrator defaults
    rtol: float = 1e-9
    atol: float = 1e-12
    max_steps: int = 1_000_000
    event_tol: float = 1e-9
    rk4_step: float = 1e-2
    y_floor: float = 1e-6

    # Oracle defaults
    fd_step: float = 1e-4
    gauss_fd_step: float = 1e-3
    richardson: bool = False
    degenerate_threshold: float = 1e-14

    # Certification tolerances
    closed_form_tol: float = 1e-7
    oracle_tol: float = 1e-4
    consistency_tol: float = 1e-5
    refutation_threshold: float = 0.1

    # Grids and sampling
    grid_ns: int = 30
    grid_nt: int = 30
    random_seed: int = 20240607

    # Application Settings
    app_name: str = "SL(2,R) Translator Lab"
    debug: bool = False
    log_level: str = "WARNING"
    log_to_file: bool = False
    logs_dir: str = "logs"


# Create settings instance
settings = Settings()


def ensure_logs_dir() -> Path:
    """Create the log directory on demand"""
    path = Path(settings.logs_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


# Verification suites run by `verify`
SUITE_CONFIGS = {
    "frame-metric": {
        "name": "Frame and metric",
        "module": "geometry_suite",
        "description": "Gram matrix of the frame, metric determinant, NAK round trips",
        "samples": 1000,
    },
    "connection": {
        "name": "Levi-Civita connection",
        "module": "geometry_suite",
        "description": "Connection table vs Christoffel contraction, compatibility, torsion",
        "samples": 50,
    },
    "killing": {
        "name": "Killing fields",
        "module": "geometry_suite",
        "description": "Finite-difference Killing equation for Dx, Dtheta, V, W",
        "samples": 200,
    },
    "closed-forms": {
        "name": "Closed-form N and H",
        "module": "surface_suite",
        "description": "Oracle vs closed-form normals and mean curvature per family",
        "curves": 50,
        "samples": 20,
    },
    "special-surfaces": {
        "name": "Special surfaces",
        "module": "surface_suite",
        "description": "Sigma_x0, Sigma_y0, Sigma_theta0: H, Gauss curvature, induced metric",
    },
    "translators": {
        "name": "Translator certifications",
        "module": "translator_suite",
        "description": "Residual below tolerance on a 30x30 grid",
    },
    "refutations": {
        "name": "Non-translator refutations",
        "module": "translator_suite",
        "description": "Residual above threshold somewhere on the grid",
    },
    "cmc": {
        "name": "Constant mean curvature facts",
        "module": "translator_suite",
        "description": "NTHETA_CMC mean curvature and the rotational V consistency check",
    },
    "a-family-poly": {
        "name": "A-family polynomial classification",
        "module": "translator_suite",
        "description": "t-polynomial coefficients vanish exactly on degenerate families",
        "curves": 100,
    },
    "ntheta-psi": {
        "name": "NTHETA_GENERAL psi variants",
        "module": "translator_suite",
        "description": "Closed-form (y, theta) against direct integration, three psi variants",
    },
    "ode": {
        "name": "ODE behaviour",
        "module": "ode_suite",
        "description": "Autonomous system decay, closed-form phi, convergence orders",
    },
}


# Named surfaces and explicit solutions (catalog)
CATALOG = {
    "sigma-x0": {
        "kind": "surface",
        "parameter": "x0",
        "default": 0.0,
        "families": ["A", "K"],
        "provenance": "Hopf cylinder over a geodesic; minimal, flat, N = -e1",
    },
    "sigma-y0": {
        "kind": "surface",
        "parameter": "y0",
        "default": 1.0,
        "families": ["N", "K"],
        "provenance": "Hopf cylinder over a circle; flat, H = 1, N = e2",
    },
    "sigma-theta0": {
        "kind": "surface",
        "parameter": "theta0",
        "default": 0.0,
        "families": ["A", "N"],
        "provenance": "Totally hyperbolic plane of curvature -4; minimal, N = (e1 - e3)/sqrt(2)",
    },
    "nx-minimal": {
        "kind": "solution",
        "family": "N",
        "defaults": {"c1": 1.0, "c2": 0.0},
        "provenance": "N-invariant Dx-translator: theta = s, y = c1 cos(sqrt2 s) + c2 sin(sqrt2 s)",
    },
    "ntheta-cmc": {
        "kind": "solution",
        "family": "N",
        "defaults": {"c1": 1.0, "c2": 0.0},
        "provenance": "N-invariant Dtheta-translator with constant angle tan(phi) = -1/sqrt2, H = -1/sqrt3",
    },
    "ntheta-general": {
        "kind": "solution",
        "family": "N",
        "defaults": {"c1": 1.0, "c2": 0.0},
        "provenance": "N-invariant Dtheta-translator, phi = arctan(sqrt2) + 2 arctan(tanh(sqrt3 s / 2))",
    },
    "nv": {
        "kind": "solution",
        "family": "N",
        "defaults": {"c": 1.0, "s0": 0.0},
        "provenance": "N-invariant V-translator: theta = s, y = c (1 + cos(sqrt2 (s - s0)))",
    },
    "rot-cmc-sub": {
        "kind": "solution",
        "family": "K",
        "defaults": {"H": 0.5, "c": 1.0},
        "provenance": "Rotational CMC curve, 0 <= H < 1; <N,W> = (c/4) k sinh(2 k s)",
    },
    "rot-cmc-one": {
        "kind": "solution",
        "family": "K",
        "defaults": {"H": 1.0, "c": 1.0},
        "provenance": "Rotational CMC curve, H = 1; <N,W> = 0",
    },
    "rot-cmc-super": {
        "kind": "solution",
        "family": "K",
        "defaults": {"H": 2.0, "c": 1.0},
        "provenance": "Rotational CMC curve, H > 1; <N,W> = (c/4) k sin(2 k s)",
    },
    "rot-line-h": {
        "kind": "solution",
        "family": "K",
        "defaults": {"c1": 0.0, "c2": 1.0},
        "provenance": "Rotational straight line phi = 0: (2 c2 s + c1, c2), H = 1, not a translator",
    },
    "rot-line-v": {
        "kind": "solution",
        "family": "K",
        "defaults": {"c1": 0.0, "c2": 1.0},
        "provenance": "Rotational straight line phi = pi/2: (c1, c2 e^{2s}), minimal",
    },
    "rot-line-slant": {
        "kind": "solution",
        "family": "K",
        "defaults": {"phi0": math.pi / 4, "c2": 1.0},
        "provenance": "Rotational straight line, constant phi0 with sin(phi0) != 0, H = cos(phi0)",
    },
}


# Reduction ODEs exposed by `solve`
PROBLEM_CONFIGS = {
    ("K", "dx"): {"state": ["x", "y", "phi"], "description": "phi' = -(sin phi + 2 y cos phi) / y"},
    ("K", "dtheta"): {"state": ["x", "y", "phi"], "description": "phi' = -2 cos phi (minimal)"},
    ("K", "v"): {"state": ["x", "y", "phi"], "description": "phi' = -(y cos phi + x sin phi) / y"},
    ("K", "w"): {"state": ["x", "y", "phi"], "description": "phi' = (x - 2) cos phi - (x^2 - y^2) sin phi / (2y)"},
    ("N", "dtheta"): {"state": ["y", "theta", "phi"], "description": "phi' = cos phi + sqrt2 sin phi"},
    ("N", "dx"): {"state": ["y", "dy", "theta"], "description": "y'' = -2 y with theta = s"},
    ("N", "v"): {"state": ["y", "f", "theta"], "description": "2 f' + f^2 + 2 = 0, f = y'/y, theta = s"},
    ("AS", "dx"): {"state": ["y", "phi"], "description": "autonomous system y' = 2 y sin phi, phi' = -sin phi / y - 2 cos phi"},
}

# Field names accepted on the command line
FIELD_NAMES = ("dx", "dtheta", "v", "w")
