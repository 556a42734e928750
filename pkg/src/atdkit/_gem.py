"""Shared generalized-EM engine for switch-structured topic mixtures.

One engine drives three optimizations that differ only in their structure
penalty and in which pieces are trainable:

  * full training (all topics' word switches and probabilities free),
  * alternative-model fitting on a candidate cluster (one appended topic
    free, the rest frozen),
  * per-document inference (topic proportions and presence switches only).

The objective everywhere is ``structure_cost - log_likelihood``, minimized.
Switch sweeps evaluate every trial flip with the exact likelihood delta
under the normalization repair rules:

  * flipping a word switch changes the topic normalizer ``mu = xbar / s``
    (``s`` = shared-model mass of the specific set, ``xbar`` = the set's
    expected-count mass), which rescales every specific-word probability
    so the topic stays a valid pmf;
  * removing a topic from a document renormalizes the remaining
    proportions; adding one gives it ``1/(M_d+1)`` and scales the rest by
    ``M_d/(M_d+1)``.

Before each sweep cycle the specific-word probabilities are re-derived
from fresh expected counts (a partial parameter M-step), which keeps the
``mu``-based repair algebra exact.  A first-order concavity bound
(``log y - log x <= (y-x)/x``) prunes word-switch candidates that provably
cannot decrease the objective, so exact evaluation only runs on survivors.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln

LN2 = math.log(2.0)
TWO_PI = 2.0 * math.pi
# a flip must beat this margin; keeps float noise from oscillating switches
ACCEPT_EPS = 1e-10


class ModelStateError(RuntimeError):
    """A document word has zero probability under every present topic."""


def bernoulli_entropy_bits(p: float) -> float:
    """Shannon entropy in bits of a Bernoulli(p); H(0) = H(1) = 0."""
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -(p * math.log2(p) + (1.0 - p) * math.log2(1.0 - p))


def log_binom(n: int, k):
    """log of the binomial coefficient, via log-gamma."""
    k = np.asarray(k, dtype=np.float64)
    return gammaln(n + 1.0) - gammaln(k + 1.0) - gammaln(n - k + 1.0)


def param_term(n_specific, lbar) -> float:
    """0.5 * N_j * log(Lbar_j / 2pi); zero when the topic has no specific
    words or no effective sample."""
    if n_specific <= 0 or lbar <= 0:
        return 0.0
    return 0.5 * float(n_specific) * math.log(float(lbar) / TWO_PI)


class GemState:
    """Mutable optimizer state over one corpus view.

    Arrays:
      doc_ptr (D+1), words (nnz), counts (nnz), doc_idx (nnz), lengths (D)
      P (T, N) current topic-word probabilities
      u (T, N) word switches; x (T, N) expected counts (sweep scratch)
      beta0 (N,) shared model
      theta (D, T) proportions (zero where absent); v (D, T) presence
      mix (nnz,) current per-entry mixture probability
    """

    def __init__(self, doc_ptr, words, counts, lengths, beta0, P, u, theta, v):
        self.doc_ptr = np.asarray(doc_ptr, dtype=np.int64)
        self.words = np.asarray(words, dtype=np.int64)
        self.counts = np.asarray(counts, dtype=np.float64)
        self.lengths = np.asarray(lengths, dtype=np.float64)
        self.D = len(lengths)
        self.doc_idx = np.repeat(np.arange(self.D, dtype=np.int64),
                                 np.diff(self.doc_ptr))
        self.beta0 = beta0
        self.P = P
        self.u = u
        self.T, self.N = P.shape
        self.x = np.zeros_like(P)
        self.theta = theta
        self.v = v
        self.mix = np.zeros(len(self.words), dtype=np.float64)
        self.refresh_mix()

    # -- bookkeeping ------------------------------------------------------

    @property
    def Nj(self) -> np.ndarray:
        return self.u.sum(axis=1)

    @property
    def Md(self) -> np.ndarray:
        return self.v.sum(axis=1)

    @property
    def Lbar(self) -> np.ndarray:
        return self.lengths @ self.v

    def refresh_mix(self) -> None:
        mix = np.zeros(len(self.words))
        for j in range(self.T):
            mix += self.theta[self.doc_idx, j] * self.P[j, self.words]
        self.mix = mix

    def loglik(self) -> float:
        if len(self.mix) == 0:
            return 0.0
        if (self.mix <= 0.0).any():
            e = int(np.argmin(self.mix))
            raise ModelStateError(
                f"word {int(self.words[e])} in document row "
                f"{int(self.doc_idx[e])} has zero mixture probability")
        return float(self.counts @ np.log(self.mix))

    # -- E and parameter-M steps ------------------------------------------

    def e_step(self) -> np.ndarray:
        """Posterior topic responsibilities per (doc, distinct-word) entry;
        also refreshes the cached mixture values."""
        numer = np.empty((len(self.words), self.T))
        for j in range(self.T):
            numer[:, j] = self.theta[self.doc_idx, j] * self.P[j, self.words]
        mix = numer.sum(axis=1)
        if (mix <= 0.0).any():
            e = int(np.argmin(mix))
            raise ModelStateError(
                f"word {int(self.words[e])} in document row "
                f"{int(self.doc_idx[e])} has zero probability under every "
                f"present topic")
        self.mix = mix
        numer /= mix[:, None]
        return numer

    def collect_x(self, resp: np.ndarray, rows) -> None:
        """Expected word counts x[j, n] for the given topic rows."""
        for j in rows:
            self.x[j] = np.bincount(self.words,
                                    weights=self.counts * resp[:, j],
                                    minlength=self.N)

    def theta_update(self, resp: np.ndarray) -> None:
        sums = np.add.reduceat(self.counts[:, None] * resp,
                               self.doc_ptr[:-1], axis=0)
        theta = sums / self.lengths[:, None]
        theta[~self.v] = 0.0
        # squash reduction noise so rows sum to one exactly
        theta /= theta.sum(axis=1, keepdims=True)
        self.theta = theta

    def beta_update(self, rows) -> None:
        """Closed-form specific-word probabilities from x; a topic whose
        specific set has zero expected mass is demoted to all-shared."""
        for j in rows:
            uj = self.u[j]
            if not uj.any():
                self.P[j] = self.beta0.copy()
                continue
            xbar = float(self.x[j][uj].sum())
            if xbar <= 0.0:
                self.u[j] = False
                self.P[j] = self.beta0.copy()
                continue
            s = float(self.beta0[uj].sum())
            mu = xbar / s
            self.P[j] = np.where(uj, self.x[j] / mu, self.beta0)


# -- cost models ----------------------------------------------------------


class TrainingCost:
    """Full structure penalty for training all topics on a corpus."""

    def __init__(self, state: GemState):
        self.M = state.T
        self.N = state.N
        self.D = state.D
        self._choose = log_binom(self.M, np.arange(self.M + 1))
        self._half_log_ld = 0.5 * np.log(state.lengths / TWO_PI)

    def total(self, state: GemState) -> float:
        nj = state.Nj
        md = state.Md
        lbar = state.Lbar
        nbar = float(nj.mean())
        cost = self.D * math.log(self.M)
        cost += float(self._choose[md].sum())
        cost += self.M * self.N * bernoulli_entropy_bits(nbar / self.N) * LN2
        cost -= 0.5 * math.log(self.M * self.N)
        cost += float(((md - 1) * self._half_log_ld).sum())
        cost += sum(param_term(int(n), float(lb)) for n, lb in zip(nj, lbar))
        return cost

    def u_delta(self, nj: int, d_n: int, nj_sum: int, lbar_j: float) -> float:
        nbar0 = nj_sum / self.M
        nbar1 = (nj_sum + d_n) / self.M
        d = self.M * self.N * LN2 * (bernoulli_entropy_bits(nbar1 / self.N)
                                     - bernoulli_entropy_bits(nbar0 / self.N))
        d += param_term(nj + d_n, lbar_j) - param_term(nj, lbar_j)
        return d

    def v_delta(self, d: int, j: int, d_m: int, md: int, nj: int,
                lbar_j: float, ld: float) -> float:
        out = float(self._choose[md + d_m] - self._choose[md])
        out += d_m * float(self._half_log_ld[d])
        out += param_term(nj, lbar_j + d_m * ld) - param_term(nj, lbar_j)
        return out


class AlternativeCost:
    """Specialized penalty when only one appended topic is trainable; the
    appended topic is pinned present in every document."""

    def __init__(self, state: GemState):
        self.T = state.T            # normal topics + 1 candidate
        self.N = state.N
        self.new = state.T - 1
        self._choose = log_binom(self.T, np.arange(self.T + 1))
        self._half_log_ld = 0.5 * np.log(state.lengths / TWO_PI)
        self._lbar_total = float(state.lengths.sum())

    def total(self, state: GemState) -> float:
        md = state.Md
        n_hat = int(state.Nj[self.new])
        cost = float(self._choose[md].sum())
        cost += self.N * bernoulli_entropy_bits(n_hat / self.N) * LN2
        cost += float(((md - 1) * self._half_log_ld).sum())
        cost += param_term(n_hat, self._lbar_total)
        return cost

    def u_delta(self, nj: int, d_n: int, nj_sum: int, lbar_j: float) -> float:
        d = self.N * LN2 * (bernoulli_entropy_bits((nj + d_n) / self.N)
                            - bernoulli_entropy_bits(nj / self.N))
        d += (param_term(nj + d_n, self._lbar_total)
              - param_term(nj, self._lbar_total))
        return d

    def v_delta(self, d, j, d_m, md, nj, lbar_j, ld) -> float:
        return float(self._choose[md + d_m] - self._choose[md]
                     + d_m * self._half_log_ld[d])


class InferenceCost:
    """Per-document penalty when topics are frozen and only proportions
    and presence switches are fitted."""

    def __init__(self, state: GemState):
        self.T = state.T
        self._choose = log_binom(self.T, np.arange(self.T + 1))
        self._half_log_ld = 0.5 * np.log(state.lengths / TWO_PI)

    def total(self, state: GemState) -> float:
        md = state.Md
        return float(self._choose[md].sum()
                     + ((md - 1) * self._half_log_ld).sum())

    def per_doc(self, state: GemState) -> np.ndarray:
        md = state.Md
        return self._choose[md] + (md - 1) * self._half_log_ld

    def v_delta(self, d, j, d_m, md, nj, lbar_j, ld) -> float:
        return float(self._choose[md + d_m] - self._choose[md]
                     + d_m * self._half_log_ld[d])


# -- word-switch sweep ----------------------------------------------------


def _word_entry_index(words_sub: np.ndarray, n_words: int):
    """Entry positions grouped by word id: (order, starts) such that
    order[starts[n]:starts[n+1]] are the positions of word n."""
    order = np.argsort(words_sub, kind="stable")
    starts = np.searchsorted(words_sub[order], np.arange(n_words + 1))
    return order, starts


def sweep_u_topic(state: GemState, cost, j: int, eligible: np.ndarray,
                  nj_sum_box: list) -> int:
    """One ascending pass over topic j's word switches; returns accepted
    flip count.  Requires P[j] consistent with x[j] (beta_update done)."""
    accepted = 0
    b0 = state.beta0
    xj = state.x[j]
    lbar_j = float(state.Lbar[j])

    # entries where topic j actually contributes to the mixture
    tj_full = state.theta[state.doc_idx, j]
    sub = np.flatnonzero(tj_full > 0.0)
    w_s = state.words[sub]
    c_s = state.counts[sub]
    t_s = tj_full[sub]
    mix_s = state.mix[sub].copy()
    order, starts = _word_entry_index(w_s, state.N)

    def entries_of(n):
        return order[starts[n]:starts[n + 1]]

    uj = state.u[j]
    xbar = float(xj[uj].sum())
    s_mass = float(b0[uj].sum())
    d1 = (np.bincount(w_s, weights=c_s * t_s / mix_s, minlength=state.N)
          if len(sub) else np.zeros(state.N))

    def bounds_and_trials():
        nj = int(uj.sum())
        q = state.P[j]
        xbar2 = np.where(uj, xbar - xj, xbar + xj)
        s2 = np.where(uj, s_mass - b0, s_mass + b0)
        n2 = np.where(uj, nj - 1, nj + 1)
        valid = eligible & ((n2 == 0) | (xbar2 > 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            q2 = np.where(uj, b0,
                          np.where(xbar2 > 0.0, xj * (s2 / xbar2), 0.0))
            if nj > 0 and xbar > 0.0:
                r = np.where((n2 == 0) | (xbar2 <= 0.0), 1.0,
                             (xbar * s2) / (xbar2 * s_mass))
            else:
                r = np.ones(state.N)
        su = float((q * d1)[uj].sum())
        others = su - np.where(uj, q * d1, 0.0)
        dl_bound = (q2 - q) * d1 + (r - 1.0) * others
        dc_on = cost.u_delta(nj, +1, nj_sum_box[0], lbar_j)
        dc_off = cost.u_delta(nj, -1, nj_sum_box[0], lbar_j)
        d_cost = np.where(uj, dc_off, dc_on)
        lower = d_cost - dl_bound
        lower[~valid] = np.inf
        return lower, q2, r, d_cost

    lower, q2, r, d_cost = bounds_and_trials()
    spec_cache = None  # gathered arrays over the current specific set

    def build_spec_cache():
        members = np.flatnonzero(uj)
        if not len(members):
            empty = np.zeros(0)
            return (np.zeros(0, dtype=np.int64), empty, empty, empty,
                    empty, empty)
        idx = np.concatenate([entries_of(m) for m in members])
        m_u = mix_s[idx]
        return (idx, c_s[idx], t_s[idx] * state.P[j, w_s[idx]], m_u,
                np.log(m_u), w_s[idx])

    for n in range(state.N):
        if lower[n] >= 0.0:
            continue
        if spec_cache is None:
            spec_cache = build_spec_cache()
        spec_idx, c_u, tq_u, m_u, log_m_u, w_u = spec_cache
        idx_n = entries_of(n)
        q_n = float(state.P[j, n])
        with np.errstate(divide="ignore", invalid="ignore"):
            dl = 0.0
            if len(idx_n):
                a_n = mix_s[idx_n] - t_s[idx_n] * q_n
                dl += float(c_s[idx_n]
                            @ (np.log(a_n + t_s[idx_n] * q2[n])
                               - np.log(mix_s[idx_n])))
            if len(spec_idx):
                contrib = c_u * (np.log(m_u + tq_u * (r[n] - 1.0))
                                 - log_m_u)
                if uj[n]:
                    # word n handled above; drop its r-scaled terms
                    contrib = contrib[w_u != n]
                dl += float(contrib.sum())
        if not (d_cost[n] - dl < -ACCEPT_EPS):
            continue

        # accept: flip, recompute normalizer, rescale row, patch mixtures
        was_on = bool(uj[n])
        uj[n] = not was_on
        xbar += -xj[n] if was_on else xj[n]
        s_mass += -b0[n] if was_on else b0[n]
        old_row = state.P[j].copy()
        if uj.any():
            mu = xbar / s_mass
            state.P[j] = np.where(uj, xj / mu, b0)
        else:
            state.P[j] = b0.copy()
        # spec-set entry groups are disjoint and exclude idx_n only when
        # turning on, so the union needs no dedup
        affected = (spec_idx if was_on
                    else np.concatenate([spec_idx, idx_n]))
        if len(affected):
            w_aff = w_s[affected]
            mix_s[affected] += t_s[affected] * (state.P[j, w_aff]
                                                - old_row[w_aff])
            upd = np.bincount(
                w_aff, weights=c_s[affected] * t_s[affected] / mix_s[affected],
                minlength=state.N)
            d1[w_aff] = upd[w_aff]
        nj_sum_box[0] += -1 if was_on else 1
        accepted += 1
        spec_cache = None
        lower, q2, r, d_cost = bounds_and_trials()

    if accepted:
        state.mix[sub] = mix_s
    return accepted


# -- presence-switch sweep -------------------------------------------------


def _v_delta_matrix(state: GemState, cols) -> np.ndarray:
    """Exact likelihood delta of flipping each v[d, j] at the current
    state, vectorized; shape (len(cols), D)."""
    out = np.zeros((len(cols), state.D))
    md_e = state.Md.astype(np.float64)[state.doc_idx]
    c, ptr = state.counts, state.doc_ptr
    log_mix = np.log(state.mix)
    with np.errstate(divide="ignore", invalid="ignore"):
        for i, j in enumerate(cols):
            t = state.theta[state.doc_idx, j]
            q = state.P[j, state.words]
            on = state.v[state.doc_idx, j]
            # off-flip: remaining proportions rescale by 1/(1-theta_j)
            # on-flip: new topic gets 1/(M_d+1), others scale M_d/(M_d+1)
            trial = np.where(on, state.mix - t * q,
                             (state.mix * md_e + q) / (md_e + 1.0))
            per_entry = (np.log(trial) - log_mix) * c
            dl = np.add.reduceat(per_entry, ptr[:-1])
            theta_j = state.theta[:, j]
            out[i] = np.where(state.v[:, j],
                              dl - state.lengths * np.log1p(-theta_j), dl)
    return out


def _v_doc_delta(state: GemState, d: int, j: int, md: float) -> float:
    """Exact likelihood delta of flipping v[d, j] for one document."""
    lo, hi = state.doc_ptr[d], state.doc_ptr[d + 1]
    mix = state.mix[lo:hi]
    q = state.P[j, state.words[lo:hi]]
    c = state.counts[lo:hi]
    with np.errstate(divide="ignore", invalid="ignore"):
        if state.v[d, j]:
            theta_j = float(state.theta[d, j])
            if theta_j >= 1.0:
                return float("-inf")  # removal would zero the whole mixture
            a = mix - theta_j * q
            return float(c @ (np.log(a) - np.log(mix))
                         - state.lengths[d] * math.log1p(-theta_j))
        return float(c @ (np.log((mix * md + q) / (md + 1.0)) - np.log(mix)))


def _apply_v_flip(state: GemState, d: int, j: int, md: float) -> None:
    """Flip v[d, j]; repair theta row d and doc d's mixtures."""
    lo, hi = state.doc_ptr[d], state.doc_ptr[d + 1]
    q = state.P[j, state.words[lo:hi]]
    if state.v[d, j]:
        theta_j = float(state.theta[d, j])
        state.v[d, j] = False
        state.theta[d, j] = 0.0
        state.theta[d] /= 1.0 - theta_j
        state.mix[lo:hi] = (state.mix[lo:hi] - theta_j * q) / (1.0 - theta_j)
    else:
        state.v[d, j] = True
        state.theta[d] *= md / (md + 1.0)
        state.theta[d, j] = 1.0 / (md + 1.0)
        state.mix[lo:hi] = (state.mix[lo:hi] * md + q) / (md + 1.0)


def sweep_v_pass(state: GemState, cost, cols) -> int:
    """One pass over presence switches, documents outer and topics inner,
    both ascending; returns accepted flip count."""
    if not len(cols):
        return 0
    dl_mat = _v_delta_matrix(state, cols)
    md_arr = state.Md
    lbar = state.Lbar.astype(np.float64)
    nj = state.Nj
    accepted = 0
    for d in range(state.D):
        dirty = False
        md = int(md_arr[d])
        ld = float(state.lengths[d])
        for i, j in enumerate(cols):
            is_on = bool(state.v[d, j])
            if is_on and md <= 1:
                continue  # never leave a document with no topics
            d_m = -1 if is_on else 1
            d_cost = cost.v_delta(d, j, d_m, md, int(nj[j]),
                                  float(lbar[j]), ld)
            delta_l = (_v_doc_delta(state, d, j, float(md)) if dirty
                       else float(dl_mat[i, d]))
            if d_cost - delta_l < -ACCEPT_EPS:
                _apply_v_flip(state, d, j, float(md))
                lbar[j] += d_m * ld
                md += d_m
                dirty = True
                accepted += 1
    return accepted


# -- drivers ---------------------------------------------------------------


def run_sweep_cycles(state: GemState, cost, u_rows, v_cols,
                     eligible: np.ndarray, max_cycles: int = 50) -> int:
    """Full switch-sweep cycles (all word switches, then all presence
    switches) until a cycle accepts nothing.  Each cycle first refreshes
    the expected counts x and re-derives the trainable topics' word
    probabilities from them, so the mu-based repair algebra is exact."""
    total = 0
    for _ in range(max_cycles):
        changed = 0
        if len(u_rows):
            resp = state.e_step()
            state.collect_x(resp, u_rows)
            state.beta_update(u_rows)
            state.refresh_mix()
            nj_sum_box = [int(state.Nj.sum())]
            for j in u_rows:
                changed += sweep_u_topic(state, cost, j, eligible, nj_sum_box)
        if len(v_cols):
            changed += sweep_v_pass(state, cost, v_cols)
        total += changed
        if changed == 0:
            break
    return total


def run_gem(state: GemState, cost, *, u_rows=(), v_cols=(), eligible=None,
            tol: float = 1e-5, max_iters: int = 200,
            max_sweep_cycles: int = 50, sweep_burnin: int = 0):
    """Alternate E-step, parameter M-step, and switch sweeps until the
    relative objective change drops below tol.  Returns (trace, converged).

    The first ``sweep_burnin`` iterations update parameters only: from a
    symmetric start the switches carry no likelihood signal yet, and
    sweeping them immediately collapses the structure (all-shared is an
    absorbing state because a topic's first specific word inherits the
    shared probability exactly).
    """
    if eligible is None:
        eligible = np.ones(state.N, dtype=bool)
    bic = cost.total(state) - state.loglik()
    trace = [bic]
    converged = False
    for it in range(max_iters):
        resp = state.e_step()
        state.theta_update(resp)
        if len(u_rows):
            state.collect_x(resp, u_rows)
            state.beta_update(u_rows)
        state.refresh_mix()
        if it >= sweep_burnin:
            run_sweep_cycles(state, cost, u_rows, v_cols, eligible,
                             max_cycles=max_sweep_cycles)
            state.refresh_mix()
        new_bic = cost.total(state) - state.loglik()
        trace.append(new_bic)
        if it >= sweep_burnin and abs(new_bic - bic) < tol * abs(bic):
            converged = True
            break
        bic = new_bic
    return trace, converged
