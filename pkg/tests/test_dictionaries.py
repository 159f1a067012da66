import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sparsecorrupt import dictionaries as dl
from sparsecorrupt.errors import DegenerateColumnError, DimensionError
from sparsecorrupt.specs import dictionary_pair, parse_dict_spec
from sparsecorrupt.errors import PreconditionError


def _coherence_loop(mat):
    # independent O(N^2) oracle
    mat = mat / np.linalg.norm(mat, axis=0)
    best = 0.0
    for i in range(mat.shape[1]):
        for j in range(mat.shape[1]):
            if i != j:
                best = max(best, abs(np.vdot(mat[:, i], mat[:, j])))
    return best


@pytest.mark.parametrize("M", [4, 16, 64])
def test_onb_builders_are_unitary(M):
    for D in (dl.build_dft(M), dl.build_identity(M), dl.build_hadamard(M)):
        G = D.entries.conj().T @ D.entries
        assert np.allclose(G, np.eye(M), atol=1e-12)
        assert D.coherence == 0.0


def test_dft_entries_match_definition():
    M = 8
    F = dl.build_dft(M).entries
    k, n = np.meshgrid(np.arange(M), np.arange(M), indexing="ij")
    assert np.allclose(F, np.exp(-2j * np.pi * k * n / M) / np.sqrt(M))


@pytest.mark.parametrize("M", [4, 16, 64])
def test_dft_identity_mutual_coherence(M):
    prof = dl.profile(dl.build_dft(M), dl.build_identity(M))
    assert prof.mu_a == 0 and prof.mu_b == 0
    assert prof.mu_m == pytest.approx(1 / np.sqrt(M), rel=1e-12)
    assert prof.mu_d == prof.mu_m


def test_hadamard_rejects_non_power_of_two():
    with pytest.raises(DimensionError):
        dl.build_hadamard(12)


@pytest.mark.parametrize("side", [4, 8])
def test_2d_transforms_orthonormal(side):
    for D in (dl.build_dct2d(side), dl.build_haar2d(side, 2)):
        assert D.shape == (side * side, side * side)
        assert D.is_real
        assert np.allclose(D.entries.conj().T @ D.entries, np.eye(side * side), atol=1e-12)


def test_dct2d_is_separable_inverse_dct():
    from scipy.fft import idctn
    side = 8
    D = dl.build_dct2d(side)
    c = np.random.default_rng(0).standard_normal(side * side)
    img = idctn(c.reshape(side, side), norm="ortho")
    assert np.allclose((D.entries @ c).real, img.ravel())


def test_haar_first_column_is_constant():
    D = dl.build_haar2d(8, 3)
    col = D.entries[:, 0].real
    assert np.allclose(col, col[0])


def test_zero_column_rejected():
    with pytest.raises(DegenerateColumnError):
        dl.Dictionary(np.array([[1.0, 0.0], [0.0, 0.0]]))


def test_columns_renormalized_and_read_only():
    D = dl.Dictionary(np.array([[3.0, 1.0], [4.0, 1.0]]))
    assert np.allclose(np.linalg.norm(D.entries, axis=0), 1.0)
    with pytest.raises(ValueError):
        D.entries[0, 0] = 2


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), st.integers(2, 9), st.integers(0, 2**31 - 1))
def test_coherence_matches_loop_oracle(M, N, seed):
    rng = np.random.default_rng(seed)
    mat = rng.standard_normal((M, N)) + 1j * rng.standard_normal((M, N))
    D = dl.Dictionary(mat)
    assert dl.coherence(D) == pytest.approx(_coherence_loop(mat), rel=1e-12, abs=1e-14)
    assert 0.0 <= dl.coherence(D) <= 1.0 + 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 6), st.integers(1, 5), st.integers(1, 5), st.integers(0, 2**31 - 1))
def test_mu_d_is_max_of_profile(M, Na, Nb, seed):
    rng = np.random.default_rng(seed)
    A = dl.Dictionary(rng.standard_normal((M, Na)))
    B = dl.Dictionary(rng.standard_normal((M, Nb)))
    prof = dl.profile(A, B)
    assert prof.mu_d == pytest.approx(dl.coherence(dl.concat(A, B)), rel=1e-12, abs=1e-15)


def test_mutual_coherence_row_mismatch():
    with pytest.raises(DimensionError):
        dl.mutual_coherence(dl.build_identity(4), dl.build_identity(8))


def test_identity_pair_fully_coherent():
    prof = dl.profile(dl.build_identity(4), dl.build_identity(4))
    assert prof.mu_m == 1.0


def test_profile_validation_and_swap():
    prof = dl.CoherenceProfile(0.1, 0.2, 0.3)
    assert prof.mu_d == 0.3
    sw = prof.swapped()
    assert (sw.mu_a, sw.mu_b, sw.mu_m) == (0.2, 0.1, 0.3)
    with pytest.raises(PreconditionError):
        dl.CoherenceProfile(-0.1, 0.0, 0.5)
    with pytest.raises(PreconditionError):
        dl.CoherenceProfile(0.0, 0.0, 1.5)


def test_etf_pair_coherence_values(etf64):
    A, B = etf64
    prof = dl.profile(A, B)
    welch = np.sqrt((160 - 64) / (64 * 159))
    assert A.shape == B.shape == (64, 80)
    for mu in (prof.mu_a, prof.mu_b, prof.mu_m, prof.mu_d):
        assert mu >= welch - 1e-9
    for ref, mu in ((0.1258, prof.mu_a), (0.1319, prof.mu_b), (0.1321, prof.mu_m)):
        assert abs(mu - ref) <= 0.02


def test_etf_is_deterministic_per_seed():
    a1 = dl.build_etf_approx(8, 12, iterations=200, seed=3)
    a2 = dl.build_etf_approx(8, 12, iterations=200, seed=3)
    a3 = dl.build_etf_approx(8, 12, iterations=200, seed=4)
    assert np.array_equal(a1.entries, a2.entries)
    assert not np.array_equal(a1.entries, a3.entries)


def test_matrix_roundtrip(tmp_path):
    rng = np.random.default_rng(1)
    mat = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
    dl.save_matrix(tmp_path / "m.txt", mat)
    assert np.array_equal(dl.load_matrix(tmp_path / "m.txt"), mat)
    real = rng.standard_normal((2, 5))
    dl.save_matrix(tmp_path / "r.txt", real)
    assert np.array_equal(dl.load_matrix(tmp_path / "r.txt"), real)


def test_dictionary_file_spec(tmp_path):
    D = dl.build_hadamard(4)
    dl.save_dictionary(tmp_path / "h.txt", D)
    E = parse_dict_spec(f"file:{tmp_path / 'h.txt'}")
    assert np.allclose(E.entries, D.entries)


def test_spec_parser():
    assert parse_dict_spec("dft:8").shape == (8, 8)
    assert parse_dict_spec("eye:8").coherence == 0
    assert parse_dict_spec("haar2d:4:octaves=1").shape == (16, 16)
    A, B = dictionary_pair("etf:8x6:seed=2:iter=100", "etf-partner")
    A2, B2 = dictionary_pair("etf:8x6:seed=2:iter=100", "etf-partner:8x6:seed=2:iter=100")
    assert np.array_equal(B.entries, B2.entries)
    for bad in ("dft", "nope:4", "dft:x", "etf:8:seed=1", "dft:8:oops"):
        with pytest.raises(PreconditionError):
            parse_dict_spec(bad)
    with pytest.raises(PreconditionError):
        parse_dict_spec("etf-partner")
    with pytest.raises(PreconditionError):
        dictionary_pair("dft:8", "identity:4")
