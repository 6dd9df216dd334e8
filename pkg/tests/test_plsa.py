import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_corpus, planted_topics, random_corpus
from divtopic import plsa
from divtopic.corpus import generate_synthetic


class TestInitRandom:
    def test_k1_theta_all_ones(self):
        corpus = make_corpus([{0: 2, 1: 1}, {1: 3}])
        state = plsa.init_random(corpus, 1, seed=0)
        assert np.allclose(state.theta, 1.0)
        assert state.phi.shape == (1, 2)
        assert state.phi.sum() == pytest.approx(1.0)

    def test_deterministic(self):
        corpus = make_corpus([{0: 2, 1: 1}, {1: 3}])
        a = plsa.init_random(corpus, 3, seed=5)
        b = plsa.init_random(corpus, 3, seed=5)
        assert np.array_equal(a.theta, b.theta)
        assert np.array_equal(a.phi, b.phi)

    @pytest.mark.parametrize("seed", [0, 1, 99])
    def test_rows_normalized(self, seed):
        corpus = make_corpus([{i: 1 + i} for i in range(4)])
        state = plsa.init_random(corpus, 5, seed=seed)
        assert np.allclose(state.theta.sum(axis=1), 1.0, atol=1e-10)
        assert np.allclose(state.phi.sum(axis=1), 1.0, atol=1e-10)


class TestEStep:
    def test_k1(self):
        corpus = make_corpus([{0: 1}])
        state = plsa.init_random(corpus, 1, seed=0)
        assert plsa.e_step_posterior(state, 0, 0).tolist() == [1.0]

    def test_symmetric(self):
        state = plsa.PlsaState(theta=np.array([[0.5, 0.5]]),
                               phi=np.array([[0.2, 0.8], [0.2, 0.8]]))
        assert np.allclose(plsa.e_step_posterior(state, 0, 0), [0.5, 0.5])

    def test_hand_computed(self):
        state = plsa.PlsaState(theta=np.array([[0.3, 0.7]]),
                               phi=np.array([[0.1, 0.9], [0.2, 0.8]]))
        post = plsa.e_step_posterior(state, 0, 0)
        assert np.allclose(post, [0.03 / 0.17, 0.14 / 0.17])

    def test_zero_numerator_falls_back_to_theta(self):
        state = plsa.PlsaState(theta=np.array([[0.3, 0.7]]),
                               phi=np.array([[0.0, 1.0], [0.0, 1.0]]))
        assert np.allclose(plsa.e_step_posterior(state, 0, 0), [0.3, 0.7])


class TestMStep:
    def test_point_mass_posteriors(self):
        corpus = make_corpus([{0: 2, 1: 1}, {1: 1, 2: 3}])
        nnz = len(corpus.csr()[1])
        posteriors = np.zeros((nnz, 2))
        posteriors[:, 0] = 1.0
        state = plsa.m_step(corpus, posteriors)
        assert np.allclose(state.theta[:, 0], 1.0)
        # topic 0 word distribution equals corpus frequencies
        expected = np.array([2, 2, 3]) / 7
        assert np.allclose(state.phi[0], expected)
        assert np.all(state.phi[1] == 0)

    def test_uniform_posteriors(self):
        corpus = make_corpus([{0: 4}, {1: 2}])
        nnz = len(corpus.csr()[1])
        state = plsa.m_step(corpus, np.full((nnz, 2), 0.5))
        assert np.allclose(state.theta, 0.5)

    def test_hand_computed_toy(self):
        # docs: d0 = {w0:2, w1:1}, d1 = {w1:1, w2:3}; K=2 posteriors set by hand
        corpus = make_corpus([{0: 2, 1: 1}, {1: 1, 2: 3}])
        posteriors = np.array([
            [0.9, 0.1],   # d0,w0
            [0.5, 0.5],   # d0,w1
            [0.2, 0.8],   # d1,w1
            [0.4, 0.6],   # d1,w2
        ])
        state = plsa.m_step(corpus, posteriors)
        theta0 = np.array([2 * 0.9 + 0.5, 2 * 0.1 + 0.5]) / 3
        theta1 = np.array([0.2 + 3 * 0.4, 0.8 + 3 * 0.6]) / 4
        assert np.allclose(state.theta[0], theta0)
        assert np.allclose(state.theta[1], theta1)
        phi0 = np.array([1.8, 0.5 + 0.2, 1.2])
        phi1 = np.array([0.2, 0.5 + 0.8, 1.8])
        assert np.allclose(state.phi[0], phi0 / phi0.sum())
        assert np.allclose(state.phi[1], phi1 / phi1.sum())

    @given(st.integers(0, 10_000))
    @settings(max_examples=25, deadline=None)
    def test_mass_conservation(self, seed):
        rng = np.random.default_rng(seed)
        corpus = random_corpus(rng, n_docs=6, V=8, max_len=12)
        K = 3
        indptr, indices, counts = corpus.csr()
        posteriors = rng.random((len(indices), K))
        posteriors /= posteriors.sum(axis=1, keepdims=True)
        weighted = posteriors * counts[:, None]
        theta_acc = np.add.reduceat(weighted, indptr[:-1], axis=0)
        assert np.allclose(theta_acc.sum(axis=1),
                           corpus.doc_lengths(), rtol=1e-9)
        _, sizes = _accumulated_sizes(corpus, posteriors)
        assert sizes.sum() == pytest.approx(corpus.token_total, rel=1e-9)


def _accumulated_sizes(corpus, posteriors):
    _, _, counts = corpus.csr()
    sizes = counts.astype(float) @ posteriors
    return posteriors, sizes


class TestLogLikelihood:
    def test_k1_equals_unigram(self):
        corpus = make_corpus([{0: 2, 1: 1}, {0: 1, 2: 2}])
        freqs = np.array([3, 1, 2]) / 6
        state = plsa.PlsaState(theta=np.ones((2, 1)), phi=freqs[None, :])
        expected = sum(
            c * np.log(freqs[w])
            for doc in corpus.documents
            for w, c in zip(doc.word_ids, doc.counts))
        assert plsa.log_likelihood(corpus, state) == pytest.approx(expected)

    def test_single_doc_hand_computed(self):
        # "a a b" with phi = (2/3, 1/3): 2*log(2/3) + log(1/3)
        corpus = make_corpus([{0: 2, 1: 1}])
        state = plsa.PlsaState(theta=np.ones((1, 1)),
                               phi=np.array([[2 / 3, 1 / 3]]))
        expected = 2 * np.log(2 / 3) + np.log(1 / 3)
        ll = plsa.log_likelihood(corpus, state)
        assert ll == pytest.approx(expected)
        assert ll == pytest.approx(-1.9095, abs=1e-4)

    def test_zero_probability_word_gives_minus_inf(self):
        corpus = make_corpus([{0: 1, 1: 1}])
        state = plsa.PlsaState(theta=np.ones((1, 1)),
                               phi=np.array([[1.0, 0.0]]))
        assert plsa.log_likelihood(corpus, state) == -np.inf


class TestTrain:
    def test_monotone_likelihood(self):
        rng = np.random.default_rng(4)
        corpus = random_corpus(rng, n_docs=30, V=20, max_len=25)
        _, trace = plsa.train(corpus, K=4, iters=50, seed=0, tol=0.0)
        trace = np.array(trace)
        drops = np.diff(trace) / np.abs(trace[:-1])
        assert np.all(drops >= -1e-9)

    def test_recovers_planted_disjoint_topics(self):
        topics = planted_topics(2, V=40, focus=1.0)
        corpus, _ = generate_synthetic(topics, 0.4, n_docs=150, doc_len=60,
                                       seed=3)
        state, _ = plsa.train(corpus, K=2, iters=120, seed=1)
        tv_direct = max(0.5 * np.abs(state.phi[k] - topics[k]).sum()
                        for k in range(2))
        tv_swapped = max(0.5 * np.abs(state.phi[k] - topics[1 - k]).sum()
                         for k in range(2))
        assert min(tv_direct, tv_swapped) < 0.05

    def test_k1_converges_to_unigram_in_one_step(self):
        corpus = make_corpus([{0: 2, 1: 1}, {0: 1, 2: 2}])
        state, _ = plsa.train(corpus, K=1, iters=1, seed=0)
        assert np.allclose(state.phi[0], np.array([3, 1, 2]) / 6)

    def test_tol_stops_early(self):
        corpus = make_corpus([{0: 5, 1: 1}, {1: 4}])
        _, trace = plsa.train(corpus, K=2, iters=500, seed=0, tol=1e-7)
        assert len(trace) < 500

    def test_threads_match_sequential(self):
        rng = np.random.default_rng(6)
        corpus = random_corpus(rng, n_docs=40, V=15, max_len=20)
        s1, t1 = plsa.train(corpus, K=3, iters=10, seed=2, threads=1)
        s4, t4 = plsa.train(corpus, K=3, iters=10, seed=2, threads=4)
        assert np.allclose(s1.theta, s4.theta, atol=1e-9)
        assert np.allclose(s1.phi, s4.phi, atol=1e-9)
        assert np.allclose(t1, t4, rtol=1e-9)


class TestExchangeability:
    def test_permuting_topics_preserves_likelihood_and_outputs(self):
        rng = np.random.default_rng(12)
        corpus = random_corpus(rng, n_docs=10, V=10, max_len=15)
        state = plsa.init_random(corpus, 4, seed=3)
        perm = np.array([2, 0, 3, 1])
        permuted = plsa.PlsaState(theta=state.theta[:, perm],
                                  phi=state.phi[perm])
        assert (plsa.log_likelihood(corpus, state)
                == pytest.approx(plsa.log_likelihood(corpus, permuted)))
        post = plsa.e_step_posterior(state, 0, int(corpus.documents[0].word_ids[0]))
        post_p = plsa.e_step_posterior(permuted, 0,
                                       int(corpus.documents[0].word_ids[0]))
        assert np.allclose(post[perm], post_p)
        ll_a, ta, pa, sa = plsa.accumulate_em(corpus, state)
        ll_b, tb, pb, sb = plsa.accumulate_em(corpus, permuted)
        assert ll_a == pytest.approx(ll_b)
        assert np.allclose(ta[:, perm], tb)
        assert np.allclose(pa[perm], pb)
        assert np.allclose(sa[perm], sb)


class TestTopicSizes:
    def test_sizes_sum_to_token_total(self):
        rng = np.random.default_rng(13)
        corpus = random_corpus(rng, n_docs=15, V=10)
        state, _ = plsa.train(corpus, K=3, iters=5, seed=0)
        sizes = plsa.topic_sizes(corpus, state)
        assert sizes.sum() == pytest.approx(corpus.token_total, rel=1e-9)
