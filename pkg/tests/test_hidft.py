"""Tests for the generalized butterfly, its oracle equivalence and identities."""

import numpy as np
import pytest

from structfft import (
    BandlimitedSignal,
    ContractViolationError,
    OpCounter,
    SupportSet,
    block_factorization_check,
    build_tree,
    classify,
    dft_direct,
    fft_radix2,
    gen_homogeneous,
    gen_elementary,
    hidft,
    hidft_oracle,
    hidft_to_dft,
    pivots,
    rel_error,
    spectrality_check,
    submatrix_unitarity,
)

rng = np.random.default_rng(99)


def random_signal(J):
    c = rng.normal(size=len(J)) + 1j * rng.normal(size=len(J))
    return BandlimitedSignal(J, c), c


def random_homogeneous(M_hi=12, s_hi=8):
    M = int(rng.integers(2, M_hi))
    s = int(rng.integers(1, min(M, s_hi) + 1))
    pivs = sorted(rng.choice(M, size=s, replace=False).tolist())
    return gen_homogeneous(pivs, M, int(rng.integers(0, 2**62)))


class TestOracleEquivalence:
    def test_random_configs(self):
        for _ in range(60):
            J = random_homogeneous(M_hi=10, s_hi=6)
            r = pivots(J)
            sig, _ = random_signal(J)
            n = int(rng.integers(0, len(r) + 1))
            a = int(rng.integers(0, J.N))
            got = hidft(sig, J, r, height=n, shift=a)
            want = hidft_oracle(sig, J, r, height=n, shift=a)
            assert got.node_residues == want.node_residues
            assert rel_error(got.node_values, want.node_values, floor=1e-9) < 1e-10

    def test_part_homogeneous_configs(self):
        fixtures = [
            (64, [3, 17, 25, 27, 35], (1, 3)),
            (1024, [0, 1, 6, 7, 512], (0, 1)),
            (8, [0, 1, 3], (0, 1)),  # a tree slot lattice with an empty branch
        ]
        for N, idx, r in fixtures:
            J = SupportSet.make(N, idx)
            sig, _ = random_signal(J)
            for n in range(len(r) + 1):
                for a in (0, 1, 5):
                    got = hidft(sig, J, r, height=n, shift=a)
                    want = hidft_oracle(sig, J, r, height=n, shift=a)
                    assert rel_error(got.node_values, want.node_values, floor=1e-9) < 1e-10

    def test_top_height_is_single_sample(self):
        # shift a reads the sample of tau^a f at the origin, i.e. f(-a)
        J = SupportSet.make(64, [3, 17, 25, 27])
        sig, _ = random_signal(J)
        res = hidft(sig, J, (1, 3), height=2, shift=5)
        assert res.node_residues == (0,)
        assert abs(res.node_values[0] - sig.sample((-5) % 64)) < 1e-12
        assert res.ops_adds == res.ops_mults == 0


class TestFullSupportDegeneration:
    @pytest.mark.parametrize("M", [1, 2, 5, 8])
    def test_equals_fft_with_identical_counts(self, M):
        N = 1 << M
        f = rng.normal(size=N) + 1j * rng.normal(size=N)
        Z = SupportSet.make(N, range(N))
        c1, c2 = OpCounter(), OpCounter()
        got = hidft(f, Z, tuple(range(M)), counter=c1)
        want = fft_radix2(f, c2)
        assert rel_error(got.values_by_index(), want, floor=1e-9) < 1e-10
        assert (c1.complex_adds, c1.complex_mults) == (c2.complex_adds, c2.complex_mults)

    def test_downsampled_heights(self):
        # at height n the full-support transform is the N/2^n-point DFT of
        # the downsampled signal
        N, n = 64, 2
        f = rng.normal(size=N) + 1j * rng.normal(size=N)
        Z = SupportSet.make(N, range(N))
        res = hidft(f, Z, tuple(range(6)), height=n)
        small = fft_radix2(f[:: 1 << n])
        for m in range(N):
            assert abs(res.value_at_index(m) - small[m % (N >> n)]) < 1e-9


class TestHidftToDft:
    def test_dc_singleton(self):
        J = SupportSet.make(16, [0])
        sig = BandlimitedSignal(J, [3.0 - 2.0j])
        rec = hidft_to_dft(hidft(sig, J, ()))
        assert abs(rec[0] - (3.0 - 2.0j)) < 1e-12

    def test_paper_eight_point_fixture(self):
        J = SupportSet.make(1024, [23, 187, 190, 247, 386, 731, 990, 994])
        assert classify(J).is_homogeneous and pivots(J) == (0, 2, 5)
        sig, c = random_signal(J)
        rec = hidft_to_dft(hidft(sig, J, (0, 2, 5)))
        assert rel_error(rec, c) < 1e-9
        full = dft_direct(sig.synthesize())
        assert rel_error(rec, full[list(J.indices)]) < 1e-9

    def test_random_homogeneous_vs_planted(self):
        for _ in range(100):
            J = random_homogeneous()
            sig, c = random_signal(J)
            ctr = OpCounter()
            rec = hidft_to_dft(hidft(sig, J, pivots(J), counter=ctr), counter=ctr)
            assert rel_error(rec, c, floor=1e-9) < 1e-9

    def test_elementary_equals_downsample_fft(self):
        # one element per class mod 2^r: the pivoted pattern is uniform and
        # the butterfly equals a 2^r-point FFT of the downsampled signal
        J = gen_elementary(3, 6, seed=5)
        sig, c = random_signal(J)
        res = hidft(sig, J, (0, 1, 2))
        down = sig.sample_block(np.arange(8) * 8)  # locations b * 2^{M-r}
        small = fft_radix2(down)
        for j in J.indices:
            assert abs(res.value_at_index(j) - small[j % 8]) < 1e-10
        rec = hidft_to_dft(res)
        assert rel_error(rec, c) < 1e-9

    def test_requires_homogeneous(self):
        J = SupportSet.make(64, [3, 17, 25, 27, 35])
        sig, _ = random_signal(J)
        with pytest.raises(ContractViolationError):
            hidft_to_dft(hidft(sig, J, (1, 3)))


class TestTreeWeightIdentity:
    def test_shifted_weights(self):
        # transform value at node v = (|I|/N) * sum over members of the
        # modulated spectrum e^{-2 pi i a l / N} Ff(l)
        for N, idx, r in [
            (64, [3, 17, 25, 27, 35], (1, 3)),
            (1024, [0, 1, 6, 7, 512], (0, 1)),
        ]:
            J = SupportSet.make(N, idx)
            sig, c = random_signal(J)
            spec = sig.coeff_map()
            for n in range(len(r) + 1):
                for a in (0, 3):
                    res = hidft(sig, J, r, height=n, shift=a)
                    scale = (1 << (len(r) - n)) / N
                    tree = build_tree(J, res.level)
                    for node in tree.nodes_at_level(res.level):
                        want = scale * sum(
                            spec[l] * np.exp(-2j * np.pi * a * l / N)
                            for l in node.members
                        )
                        got = res.values[node.residue]
                        assert abs(got - want) <= 1e-9 * max(abs(want), 1e-9)


class TestSplitIdentity:
    def test_height1_restriction(self):
        # the height-1 transform restricted to a branch equals the height-0
        # transform of that branch's subset
        J = SupportSet.make(32, [3, 17, 25, 27])
        r = (1, 3)
        sig, _ = random_signal(J)
        res1 = hidft(sig, J, r, height=1)
        j1 = SupportSet.make(32, [3, 17])   # left branch of the level-3 split
        j2 = SupportSet.make(32, [25, 27])  # right branch
        for sub in (j1, j2):
            res0 = hidft(sig, sub, r[:-1], height=0)
            for j in sub.indices:
                assert abs(res1.value_at_index(j) - res0.value_at_index(j)) < 1e-10


class TestExactOpCount:
    def test_every_config(self):
        for _ in range(40):
            J = random_homogeneous(M_hi=9, s_hi=6)
            r = pivots(J)
            sig, _ = random_signal(J)
            n = int(rng.integers(0, len(r) + 1))
            ctr = OpCounter()
            hidft(sig, J, r, height=n, shift=int(rng.integers(0, J.N)), counter=ctr)
            A = 1 << (len(r) - n)
            logA = len(r) - n
            assert ctr.total == round(1.5 * A * logA)
            assert ctr.total <= 1.5 * A * logA + A  # stated upper bound

    def test_degenerate_tree_same_count(self):
        # missing branches are padded, so the count ignores tree shape
        J = SupportSet.make(8, [0, 1, 3])
        sig, _ = random_signal(J)
        ctr = OpCounter()
        hidft(sig, J, (0, 1), counter=ctr)
        assert ctr.total == round(1.5 * 4 * 2)

    def test_determinism(self):
        J = random_homogeneous()
        sig, _ = random_signal(J)
        a = hidft(sig, J, pivots(J))
        b = hidft(sig, J, pivots(J))
        assert np.array_equal(a.node_values, b.node_values)
        assert a.node_residues == b.node_residues


class TestBlockFactorization:
    def test_paper_fixture(self):
        rep = block_factorization_check(SupportSet.make(32, [3, 17, 25, 27]), (1, 3))
        assert rep.passed and rep.max_err <= 1e-12 and rep.n_pairs == 2

    def test_z4_textbook(self):
        rep = block_factorization_check(SupportSet.make(4, [0, 1, 2, 3]), (0, 1))
        assert rep.passed and rep.n_pairs == 2

    def test_random_homogeneous(self):
        for _ in range(50):
            J = random_homogeneous(M_hi=10, s_hi=6)
            r = pivots(J)
            if not r:
                continue
            rep = block_factorization_check(J, r)
            assert rep.passed, rep

    def test_degenerate_skips(self):
        # {0,1,3} at r=(0,1): residue-3 node at level 2 has no sibling
        rep = block_factorization_check(SupportSet.make(8, [0, 1, 3]), (0, 1))
        assert rep.passed
        assert len(rep.skipped) == 1


class TestSpectrality:
    def test_paper_fixture_and_named_rows(self):
        J = SupportSet.make(1024, [316, 384, 828, 896])
        rep = spectrality_check(J)
        assert rep.passed and rep.max_err <= 1e-9
        assert submatrix_unitarity([1, 292, 641, 932], J.indices, 1024) <= 1e-9

    def test_periodic_subgroup(self):
        assert spectrality_check(SupportSet.make(8, [0, 4])).passed

    def test_non_power_of_two_rejected(self):
        from structfft import InvalidInputError

        with pytest.raises(InvalidInputError):
            spectrality_check(SupportSet.make(8, [0, 1, 2]))

    def test_iff_homogeneous(self):
        for _ in range(60):
            M = int(rng.integers(2, 9))
            N = 1 << M
            k = 1 << int(rng.integers(1, min(M, 4) + 1))
            J = SupportSet.make(N, rng.choice(N, size=k, replace=False).tolist())
            assert spectrality_check(J).passed == classify(J).is_homogeneous
