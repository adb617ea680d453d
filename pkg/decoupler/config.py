"""
Configuration Loader for Decoupler
Loads and validates device and run configuration from a YAML file
"""

from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple

import yaml

from decoupler.circuit.coupler import COUPLER_MODELS
from decoupler.circuit.model import CircuitSpec, TunableJunction
from decoupler.constants import (
    DEFAULT_CHAIN_CUTOFF,
    DEFAULT_CHAIN_EIGENPAIRS,
    DEFAULT_CHAIN_LEVELS,
    DEFAULT_CONFIG_FILE,
    DEFAULT_DIMER_LEVELS,
    DEFAULT_GATE_CUTOFF,
    DEFAULT_GATE_LEVELS,
    DEFAULT_MAX_DIMENSION,
    DEFAULT_OUTPUT_DIR,
    FEMTOFARAD,
    default_thread_count,
    ghz_to_angular,
    phi0_to_rad,
)
from decoupler.errors import ConfigError
from decoupler.fock import TruncationPolicy

SECTIONS = (
    "circuit",
    "coupler",
    "qubits",
    "truncation",
    "sweep",
    "idle",
    "manifold",
    "robustness",
    "gate",
    "chain",
    "runtime",
)
CAPACITANCE_KEYS = ("C1_fF", "C2_fF", "CC_fF", "Cg_fF", "C12_fF", "C1c_fF", "C2c_fF")
SHUNT_KEYS = ("C1_fF", "C2_fF", "CC_fF", "Cg_fF")
TRUNCATION_KINDS = ("dimer", "gate", "chain")

TRUNCATION_DEFAULTS = {
    "dimer": {"levels": DEFAULT_DIMER_LEVELS, "cutoff": None},
    "gate": {"levels": DEFAULT_GATE_LEVELS, "cutoff": DEFAULT_GATE_CUTOFF},
    "chain": {"levels": DEFAULT_CHAIN_LEVELS, "cutoff": DEFAULT_CHAIN_CUTOFF, "eigenpairs": DEFAULT_CHAIN_EIGENPAIRS},
}


def parse_truncation(text: str) -> Dict[str, Optional[int]]:
    """'6' -> levels 6; '4:6' -> levels 4 with excitation cutoff 6."""
    levels, _, cutoff = str(text).partition(":")
    try:
        return {"levels": int(levels), "cutoff": int(cutoff) if cutoff else None}
    except ValueError:
        raise ConfigError(f"Invalid truncation '{text}': expected LEVELS or LEVELS:CUTOFF")


def linspace_spec(value: Any, name: str) -> Tuple[float, float, int]:
    """[start, stop, count] triple from the config."""
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        raise ConfigError(f"'{name}' must be [start, stop, count]")
    start, stop, count = value
    if int(count) < 2:
        raise ConfigError(f"'{name}' needs at least 2 points")
    return float(start), float(stop), int(count)


class Config:
    """Configuration manager for Decoupler."""

    def __init__(self, config_path: Optional[Path] = None):
        """
        Initialize configuration from YAML file.

        Args:
            config_path: Path to the YAML config (defaults to the bundled paper.yaml)
        """
        if config_path is None:
            config_path = DEFAULT_CONFIG_FILE

        self.config_path = Path(config_path)
        self._config = self._load_config()

    def _load_config(self) -> Dict[str, Any]:
        """Load configuration from YAML file."""
        if not self.config_path.exists():
            raise ConfigError(
                f"Config file not found: {self.config_path}\n"
                f"Start from the bundled paper.yaml and adjust the circuit parameters."
            )

        try:
            with open(self.config_path, "r") as f:
                config = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ConfigError(f"Config file {self.config_path} is not valid YAML: {e}")

        if not isinstance(config, dict):
            raise ConfigError(f"Config file {self.config_path} must contain a mapping")

        self._validate_config(config)
        return config

    def _validate_config(self, config: Dict[str, Any]) -> None:
        """Validate that required configuration fields are present."""
        required_sections = ["circuit", "coupler", "qubits"]
        for section in required_sections:
            if section not in config:
                raise ConfigError(f"Missing required config section: {section}")
            if not isinstance(config[section], dict):
                raise ConfigError(f"Config section '{section}' must be a mapping")

        unknown = set(config) - set(SECTIONS)
        if unknown:
            raise ConfigError(f"Unknown config section(s): {', '.join(sorted(unknown))}")

        # Capacitances
        uncoupled = config["circuit"].get("uncoupled", False)
        if not isinstance(uncoupled, bool):
            raise ConfigError(f"circuit.uncoupled must be true or false, got {uncoupled!r}")
        for key in CAPACITANCE_KEYS:
            value = config["circuit"].get(key)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"circuit.{key} must be a number, got {value!r}")
            if key in SHUNT_KEYS and value <= 0:
                raise ConfigError(f"circuit.{key} must be positive, got {value}")
            if value < 0:
                raise ConfigError(f"circuit.{key} must be non-negative, got {value}")
            if value == 0 and not uncoupled:
                raise ConfigError(
                    f"circuit.{key} must be positive, got {value} "
                    "(set circuit.uncoupled: true for a decoupled circuit)"
                )

        # Coupler
        for key in ("EJc_GHz", "alpha"):
            value = config["coupler"].get(key)
            if isinstance(value, bool) or not isinstance(value, (int, float)) or value <= 0:
                raise ConfigError(f"coupler.{key} must be a positive number, got {value!r}")
        model = config["coupler"].get("model", "exact")
        if model not in COUPLER_MODELS:
            raise ConfigError(f"coupler.model must be one of {', '.join(COUPLER_MODELS)}, got '{model}'")

        # Qubits
        for name in ("q1", "q2"):
            qubit = config["qubits"].get(name)
            if not isinstance(qubit, dict):
                raise ConfigError(f"Missing required qubit section: qubits.{name}")
            if "frequency_GHz" not in qubit and not ("EJL_GHz" in qubit and "EJR_GHz" in qubit):
                raise ConfigError(f"qubits.{name} needs frequency_GHz or EJL_GHz/EJR_GHz")

    # ===== CIRCUIT =====

    @property
    def capacitances_fF(self) -> Dict[str, float]:
        """Circuit capacitances in fF, keyed without the unit suffix."""
        return {key[:-3]: float(self._config["circuit"][key]) for key in CAPACITANCE_KEYS}

    @property
    def uncoupled(self) -> bool:
        return bool(self._config["circuit"].get("uncoupled", False))

    @property
    def coupler_EJ_GHz(self) -> float:
        return float(self._config["coupler"]["EJc_GHz"])

    @property
    def coupler_alpha(self) -> float:
        return float(self._config["coupler"]["alpha"])

    @property
    def coupler_flux_Phi0(self) -> float:
        """Operating flux of the coupler."""
        return float(self._config["coupler"].get("flux_Phi0", 0.5))

    @property
    def coupler_phi_cor_Phi0(self) -> float:
        return float(self._config["coupler"].get("phi_cor_Phi0", 0.0))

    @property
    def coupler_charging_scale(self) -> float:
        return float(self._config["coupler"].get("charging_scale", 1.0))

    @property
    def coupler_model(self) -> str:
        return self._config["coupler"].get("model", "exact")

    def qubit(self, name: str) -> Dict[str, Any]:
        return self._config["qubits"][name]

    def circuit_spec(self) -> CircuitSpec:
        """
        CircuitSpec in internal units (F, rad/ns, rad).

        Raises:
            ConfigError: values that do not convert
        """
        targets, junctions, biases = [], [], []
        for name in ("q1", "q2"):
            qubit = self.qubit(name)
            frequency = qubit.get("frequency_GHz")
            targets.append(ghz_to_angular(float(frequency)) if frequency is not None else None)
            if "EJL_GHz" in qubit and "EJR_GHz" in qubit:
                junctions.append(
                    TunableJunction(EJL=ghz_to_angular(float(qubit["EJL_GHz"])), EJR=ghz_to_angular(float(qubit["EJR_GHz"])))
                )
            else:
                junctions.append(None)
            biases.append(phi0_to_rad(float(qubit.get("flux_Phi0", 0.0))))

        C = {name: value * FEMTOFARAD for name, value in self.capacitances_fF.items()}
        return CircuitSpec(
            C1=C["C1"],
            C2=C["C2"],
            CC=C["CC"],
            Cg=C["Cg"],
            C12=C["C12"],
            C1c=C["C1c"],
            C2c=C["C2c"],
            EJc=ghz_to_angular(self.coupler_EJ_GHz),
            alpha=self.coupler_alpha,
            phi_ext_c=phi0_to_rad(self.coupler_flux_Phi0),
            junctions=tuple(junctions),
            qubit_targets=tuple(targets),
            phi_ext_q=tuple(biases),
            phi_cor=phi0_to_rad(self.coupler_phi_cor_Phi0),
            coupler_charging_scale=self.coupler_charging_scale,
            coupler_model=self.coupler_model,
            uncoupled=self.uncoupled,
        )

    # ===== TRUNCATION =====

    def truncation_settings(self, kind: str) -> Dict[str, Any]:
        if kind not in TRUNCATION_KINDS:
            raise ConfigError(f"Unknown truncation kind: '{kind}'. Available: {', '.join(TRUNCATION_KINDS)}")
        settings = dict(TRUNCATION_DEFAULTS[kind])
        settings.update(self._config.get("truncation", {}).get(kind, {}) or {})
        return settings

    def truncation_policy(self, kind: str = "dimer", override: Optional[str] = None) -> TruncationPolicy:
        """
        TruncationPolicy for dimer, gate or chain work.

        Args:
            kind: Which truncation section to use
            override: '--truncation' value (LEVELS or LEVELS:CUTOFF)
        """
        settings = self.truncation_settings(kind)
        if override:
            settings.update(parse_truncation(override))
        levels = settings.get("levels")
        if isinstance(levels, list):
            levels = tuple(int(n) for n in levels)
        return TruncationPolicy(
            levels=levels,
            cutoff=settings.get("cutoff"),
            max_dim=int(settings.get("max_dim", DEFAULT_MAX_DIMENSION)),
            eigenpairs=settings.get("eigenpairs"),
            overlap_threshold=float(settings.get("overlap_threshold", 0.5)),
        )

    # ===== SWEEPS AND SEARCHES =====

    @property
    def sweep(self) -> Dict[str, Any]:
        """Flux sweeps for coupler-spectrum and crosstalk."""
        return {
            "spectrum_Phi0": [0.0, 1.0, 101],
            "crosstalk_Phi0": [0.35, 0.5, 61],
            **(self._config.get("sweep") or {}),
        }

    @property
    def idle(self) -> Dict[str, Any]:
        return {
            "window_Phi0": [0.35, 0.5],
            "objective": "epsilon",
            "grid_points": 41,
            "xtol": 1e-9,
            **(self._config.get("idle") or {}),
        }

    @property
    def idle_window(self) -> Tuple[float, float]:
        low, high = self.idle["window_Phi0"]
        return phi0_to_rad(float(low)), phi0_to_rad(float(high))

    @property
    def manifold(self) -> Dict[str, Any]:
        return {
            "EJc_GHz": [30.0, 60.0, 41],
            "alpha": [0.15, 0.35, 41],
            "bisection_steps": 6,
            **(self._config.get("manifold") or {}),
        }

    @property
    def robustness(self) -> Dict[str, Any]:
        return {
            "d_EC": [-0.05, 0.05, 41],
            "d_EJ": [-0.05, 0.05, 41],
            "objective": "zeta",
            **(self._config.get("robustness") or {}),
        }

    # ===== GATE =====

    @property
    def gate(self) -> Dict[str, Any]:
        return {
            "scheme": "cz40",
            "t_gate_ns": None,
            "tau_ns": None,
            "omega_int_GHz": None,
            "omega_q1_int_GHz": None,
            "dt_ns": 1e-3,
            "optimize_dt_ns": 1e-2,
            "sample_dt_ns": 0.25,
            "tau_coherence_us": 50.0,
            "leakage_weight": 1.0,
            "max_evaluations": 300,
            "omega_int_bounds_GHz": [5.2, 6.05],
            "objective_target": None,
            "check_convergence": True,
            **(self._config.get("gate") or {}),
        }

    # ===== CHAIN =====

    @property
    def chain(self) -> Dict[str, Any]:
        return {
            "qubit_frequencies_GHz": [5.9, 6.6, 6.1, 6.5],
            "adjust_shunts": True,
            "sweep_points": 41,
            "solver": "sparse",
            **(self._config.get("chain") or {}),
        }

    # ===== RUNTIME =====

    @property
    def threads(self) -> int:
        value = (self._config.get("runtime") or {}).get("threads")
        return int(value) if value else default_thread_count()

    @property
    def output_dir(self) -> Path:
        value = (self._config.get("runtime") or {}).get("out_dir")
        return Path(value) if value else DEFAULT_OUTPUT_DIR

    # ===== UTILITY METHODS =====

    def apply_overrides(self, overrides: Sequence[str]) -> None:
        """
        Apply '--set key=value' overrides in dot notation.

        Values are parsed as YAML so numbers, booleans, null and lists keep
        their types. The result is validated like a freshly loaded file.
        """
        for item in overrides or ():
            key, sep, raw = item.partition("=")
            if not sep or not key.strip():
                raise ConfigError(f"Invalid override '{item}': expected key=value")
            keys = key.strip().split(".")
            if keys[0] not in SECTIONS:
                raise ConfigError(f"Unknown config section in override '{item}'")
            try:
                value = yaml.safe_load(raw)
            except yaml.YAMLError as e:
                raise ConfigError(f"Invalid override value in '{item}': {e}")

            node = self._config
            for k in keys[:-1]:
                if node.get(k) is None:
                    node[k] = {}
                if not isinstance(node[k], dict):
                    raise ConfigError(f"Override '{item}' descends into a non-mapping value")
                node = node[k]
            node[keys[-1]] = value
        self._validate_config(self._config)

    def reload(self) -> None:
        """Reload configuration from file."""
        self._config = self._load_config()

    def to_dict(self) -> Dict[str, Any]:
        """
        Return a copy of the raw configuration dictionary.

        Returns:
            Dict containing all configuration values
        """
        return yaml.safe_load(yaml.safe_dump(self._config))

    def get(self, key: str, default: Any = None) -> Any:
        """
        Get configuration value by dot-notation key.

        Example: config.get('coupler.alpha')
        """
        keys = key.split(".")
        value = self._config

        for k in keys:
            if isinstance(value, dict):
                value = value.get(k)
                if value is None:
                    return default
            else:
                return default

        return value


# Global config instance
_config: Optional[Config] = None


def get_config(config_path=None) -> Config:
    """
    Get global configuration instance.
    Creates instance on first call, then returns cached instance.
    """
    global _config
    if _config is None:
        _config = Config(config_path)
    return _config


def reload_config() -> None:
    """Reload configuration from file."""
    global _config
    if _config is not None:
        _config.reload()
    else:
        _config = Config()


def load_config(config_path=None) -> Config:
    """Fresh Config from a path, also cached as the global instance."""
    global _config
    _config = Config(config_path)
    return _config
