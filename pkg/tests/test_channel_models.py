import numpy as np
import pytest

from qkd_security.components.channel_models import ClassicalChannel, FixedErrorChannel, QuantumChannel
from qkd_security.components.evemodel import PRESETS, identity_attack
from qkd_security.logging_exception import ConfigError, ResourceCapError


class TestClassicalChannel:

    @pytest.mark.parametrize("name", sorted(PRESETS))
    def test_every_preset_has_a_shadow(self, name):
        assert ClassicalChannel.from_preset(name).name == name

    def test_unknown_preset(self):
        with pytest.raises(ConfigError):
            ClassicalChannel.from_preset("teleport")

    def test_probability_range(self):
        with pytest.raises(ConfigError):
            ClassicalChannel(flip_z=1.5)

    def test_bit_flip_on_z_only(self, rng):
        channel = ClassicalChannel.from_preset("bit-flip")
        i = np.array([0, 1, 0, 1], dtype=np.uint8)
        b = np.array([0, 0, 1, 1], dtype=np.uint8)
        np.testing.assert_array_equal(channel.transmit(i, b, b, rng), [1, 0, 0, 1])

    def test_binary_symmetric_rate(self, rng):
        channel = ClassicalChannel.binary_symmetric(0.1)
        zeros = np.zeros(20000, dtype=np.uint8)
        assert channel.transmit(zeros, zeros, zeros, rng).mean() == pytest.approx(0.1, abs=0.01)


class TestOtherBackends:

    def test_fixed_errors_on_matching_bases(self, rng):
        channel = FixedErrorChannel(np.array([1, 0, 1], dtype=np.uint8))
        i = np.zeros(3, dtype=np.uint8)
        np.testing.assert_array_equal(channel.transmit(i, i, i, rng), [1, 0, 1])

    def test_quantum_cap(self):
        with pytest.raises(ResourceCapError):
            QuantumChannel(identity_attack(9))
