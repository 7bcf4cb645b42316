import numpy as np
import pytest

from qkd_security.components.gf2code import CodeSpec


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    """Keep QKD_* variables from the developer's shell out of the tests"""
    for name in ("QKD_SEED", "QKD_MAX_DIM", "QKD_SPAN_CAP_BITS", "QKD_OUTPUT_DIR", "QKD_LOG_LEVEL", "QKD_WORKERS"):
        monkeypatch.delenv(name, raising=False)


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)


@pytest.fixture
def repetition_code():
    """P_C = {110, 011}, P_PA = {111}: cosets of {000, 111}, v_hat = 1"""
    return CodeSpec.from_rows(["110", "011"], ["111"], n=3, label="repetition")


@pytest.fixture
def parity_code_2():
    """Two information bits, no ECC, key = parity"""
    return CodeSpec.from_rows([], ["11"], n=2, label="parity")
