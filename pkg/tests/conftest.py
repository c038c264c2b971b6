import numpy as np
import pytest

from quadcal import _reduction_py

try:
    from quadcal import _reduction as _reduction_c
except ImportError:
    _reduction_c = None


@pytest.fixture(params=["python", "compiled"])
def kernel(request):
    """Both elimination kernels, so every contract test runs against each."""
    if request.param == "compiled":
        if _reduction_c is None:
            pytest.skip("compiled kernel not built")
        return _reduction_c
    return _reduction_py


@pytest.fixture(params=["python", "compiled"])
def kernel_patched(request, monkeypatch):
    """Patch the kernel used by rule construction; yields the kernel name."""
    import quadcal.implicit as implicit

    if request.param == "compiled":
        if _reduction_c is None:
            pytest.skip("compiled kernel not built")
        monkeypatch.setattr(implicit, "_kernel", _reduction_c)
    else:
        monkeypatch.setattr(implicit, "_kernel", _reduction_py)
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
