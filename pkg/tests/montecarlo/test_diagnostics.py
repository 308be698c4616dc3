import pytest

from quickdetect.detection import ParameterError
from quickdetect.info import info_number_ar
from quickdetect.montecarlo import max_llr_diagnostic, slln_diagnostic


def test_enormous_tolerance_never_exceeded(ar1_model, settings):
    result = slln_diagnostic(ar1_model, [0.5], 0, 1, 1e6, settings)
    assert list(result) == [1]
    assert result[1].mean == 0.0


@pytest.mark.parametrize("theta", [0.4, 0.9])
def test_deviation_frequency_decays(ar1_model, settings, theta):
    info = info_number_ar(theta, 0.0).value
    result = slln_diagnostic(ar1_model, [theta], 10, [2000, 100, 500], 0.1 * info, settings)
    assert list(result) == [100, 500, 2000]
    for shorter, longer in zip([100, 500], [500, 2000]):
        spread = (result[shorter].std_error**2 + result[longer].std_error**2) ** 0.5
        assert result[longer].mean <= result[shorter].mean + 2 * spread
    if theta == 0.4:
        assert result[2000].mean < result[100].mean


def test_max_llr_rarely_overshoots(ar1_model, settings):
    estimate = max_llr_diagnostic(ar1_model, [0.5], 0, 2000, 0.5, settings)
    assert estimate.mean < 0.01
    assert max_llr_diagnostic(ar1_model, [0.5], 0, 10, 1e6, settings).mean == 0.0


def test_diagnostic_argument_checks(ar1_model, settings):
    with pytest.raises(ParameterError):
        slln_diagnostic(ar1_model, [0.5], 0, [0, 10], 0.1, settings)
    with pytest.raises(ParameterError):
        slln_diagnostic(ar1_model, [0.5], 0, 10, 0.0, settings)
    with pytest.raises(ParameterError):
        max_llr_diagnostic(ar1_model, [0.5], 0, 0, 0.1, settings)
