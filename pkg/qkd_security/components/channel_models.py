"""
Channel backends for protocol runs
Every backend maps (Alice's bits, Alice's bases, Bob's bases) to Bob's outcomes.
"""

import logging
from dataclasses import dataclass

import numpy as np

from qkd_security.components.evemodel import AttackSpec, channel_prob_vector
from qkd_security.constants import MAX_EXACT_PROTOCOL_QUBITS
from qkd_security.logging_exception import ConfigError, DimensionMismatchError, ResourceCapError
from qkd_security.utils.bits import int_to_bits, to_bits

logger = logging.getLogger(__name__)


class QuantumChannel:
    """
    Exact backend: Bob's outcome distribution comes from Eve's attack

    Args:
        attack (AttackSpec): Attack on exactly the transmitted qubits
    """

    def __init__(self, attack: AttackSpec):
        if attack.n_qubits > MAX_EXACT_PROTOCOL_QUBITS:
            raise ResourceCapError(
                f"Exact simulation supports at most {MAX_EXACT_PROTOCOL_QUBITS} qubits, got {attack.n_qubits}"
            )
        self.attack = attack
        self.loss_prob = 0.0
        logger.debug(f"Quantum channel over {attack.n_qubits} qubits ({attack.name})")

    @property
    def name(self) -> str:
        return self.attack.name

    def transmit(self, i: np.ndarray, b: np.ndarray, bob_basis: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        if len(i) != self.attack.n_qubits:
            raise DimensionMismatchError(
                f"Attack acts on {self.attack.n_qubits} qubits but {len(i)} were sent"
            )
        probs = channel_prob_vector(self.attack, i, b, bob_basis)
        probs = np.clip(probs, 0.0, None)
        outcome = int(rng.choice(len(probs), p=probs / probs.sum()))
        return int_to_bits(outcome, len(i))


@dataclass
class ClassicalChannel:
    """
    Stochastic backend for large n: per-basis bit flips, qubit loss, and a
    block event replacing Bob's whole string by uniformly random bits

    Positions where Bob's basis differs from Alice's always give a uniformly
    random outcome.
    """

    flip_z: float = 0.0
    flip_x: float = 0.0
    swap_prob: float = 0.0
    loss_prob: float = 0.0
    name: str = "classical"

    def __post_init__(self):
        for label, value in (("flip_z", self.flip_z), ("flip_x", self.flip_x),
                             ("swap_prob", self.swap_prob), ("loss_prob", self.loss_prob)):
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{label} must be in [0, 1], got {value}")

    @classmethod
    def from_preset(cls, name: str) -> "ClassicalChannel":
        """Error statistics of a named attack preset, without the quantum state"""
        shadows = {
            "identity": cls(name="identity"),
            "swap": cls(swap_prob=1.0, name="swap"),
            "swap-entangled": cls(swap_prob=1.0, name="swap-entangled"),
            "swap-bb84": cls(swap_prob=1.0, name="swap-bb84"),
            "half-swap": cls(swap_prob=0.5, name="half-swap"),
            "intercept-z": cls(flip_x=0.5, name="intercept-z"),
            "cnot-probe": cls(flip_x=0.5, name="cnot-probe"),
            "intercept-x": cls(flip_z=0.5, name="intercept-x"),
            "intercept-random": cls(flip_z=0.25, flip_x=0.25, name="intercept-random"),
            "bit-flip": cls(flip_z=1.0, name="bit-flip"),
        }
        if name not in shadows:
            raise ConfigError(f"No classical model for preset '{name}'")
        return shadows[name]

    @classmethod
    def binary_symmetric(cls, p: float, loss_prob: float = 0.0) -> "ClassicalChannel":
        return cls(flip_z=p, flip_x=p, loss_prob=loss_prob, name=f"bsc({p})")

    def transmit(self, i: np.ndarray, b: np.ndarray, bob_basis: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        i, b, bob_basis = to_bits(i), to_bits(b, len(i)), to_bits(bob_basis, len(i))
        random_bits = rng.integers(0, 2, size=len(i), dtype=np.uint8)
        if rng.random() < self.swap_prob:
            return random_bits
        flip_p = np.where(b == 1, self.flip_x, self.flip_z)
        flips = (rng.random(len(i)) < flip_p).astype(np.uint8)
        j = i ^ flips
        return np.where(b == bob_basis, j, random_bits).astype(np.uint8)


@dataclass
class FixedErrorChannel:
    """Bob receives i xor c on matching bases for a fixed error string c"""

    errors: np.ndarray
    loss_prob: float = 0.0
    name: str = "fixed-error"

    def transmit(self, i: np.ndarray, b: np.ndarray, bob_basis: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        c = to_bits(self.errors, len(i))
        random_bits = rng.integers(0, 2, size=len(i), dtype=np.uint8)
        return np.where(to_bits(b) == to_bits(bob_basis), to_bits(i) ^ c, random_bits).astype(np.uint8)

