"""Compare production routines against the brute-force oracles on random cases."""
from __future__ import annotations

import random
from typing import Callable

import numpy as np

from . import oracles
from .decode import DecodeConfig, beam_search, greedy
from .metrics import meteor_alignment, optimal_transport, rouge_l, rouge_n
from .metrics.meteor import meteor
from .textcore import lcs_length


def random_pair(rng: random.Random, max_len: int, alphabet: int, min_len: int = 0):
    letters = "abcdefghij"[:alphabet]
    a = [rng.choice(letters) for _ in range(rng.randint(min_len, max_len))]
    b = [rng.choice(letters) for _ in range(rng.randint(min_len, max_len))]
    return a, b


def grid_transport_instance(rng: random.Random):
    """Random masses on the 0.25 grid (<= 3 points per side) with random costs."""

    def masses():
        k = rng.randint(1, 3)
        cuts = sorted(rng.sample(range(1, 4), k - 1))
        units = [b - a for a, b in zip([0] + cuts, cuts + [4])]
        return np.array(units) * 0.25

    p, q = masses(), masses()
    cost = np.array([[rng.uniform(0, 3) for _ in q] for _ in p])
    return p, q, cost


def markov_toy(seed: int, vocab: int = 3, concentration: float = 0.5) -> Callable:
    """Toy next-token model: a fixed random distribution per distinct prefix."""
    cache: dict = {}

    def step(prefixes):
        rows = []
        for pfx in prefixes:
            key = tuple(int(t) for t in pfx)
            if key not in cache:
                g = np.random.default_rng([seed, len(key), *key])
                cache[key] = np.log(g.dirichlet(np.full(vocab, concentration)))
            rows.append(cache[key])
        return np.array(rows)

    return step


def run(seed: int = 0, verbose: bool = True) -> bool:
    rng = random.Random(seed)
    failures = []

    def check(name, ok):
        if verbose:
            print(f"{'PASS' if ok else 'FAIL'}  {name}")
        if not ok:
            failures.append(name)

    pairs = [random_pair(rng, 8, 3) for _ in range(100)]
    check("lcs_length vs exhaustive subsequences",
          all(lcs_length(a, b) == oracles.lcs_bruteforce(a, b) for a, b in pairs))

    pairs = [random_pair(rng, 10, 5) for _ in range(100)]
    ok = True
    for a, b in pairs:
        for n in (1, 2):
            s = rouge_n(a, b, n)
            ok &= np.allclose((s.precision, s.recall, s.f1), oracles.rouge_n_bruteforce(a, b, n), atol=1e-9)
        s = rouge_l(a, b)
        ok &= np.allclose((s.precision, s.recall, s.f1), oracles.rouge_l_bruteforce(a, b), atol=1e-9)
    check("rouge-1/2/L vs direct counting", bool(ok))

    pairs = [random_pair(rng, 7, 3, 1) for _ in range(50)]
    check("meteor alignment vs enumeration",
          all(tuple(meteor_alignment(a, b)) == oracles.meteor_alignment_bruteforce(a, b)
              and abs(meteor(a, b) - oracles.meteor_bruteforce(a, b)) < 1e-9 for a, b in pairs))

    ok = True
    for _ in range(30):
        p, q, cost = grid_transport_instance(rng)
        res = optimal_transport(p, q, cost)
        ok &= abs(res.cost - oracles.wmd_bruteforce(p, q, cost)) < 1e-6
        ok &= np.abs(res.plan.sum(1) - p).max() < 1e-9 and np.abs(res.plan.sum(0) - q).max() < 1e-9
    check("optimal transport vs grid enumeration", bool(ok))

    ok = True
    for s in range(20):
        step = markov_toy(seed * 1000 + s, vocab=4)
        cfg = DecodeConfig(beam_width=256, alpha=1.5, block_n=2, max_len=5)
        best = beam_search(step, cfg, eos=0)
        tokens, _ = oracles.best_sequence_bruteforce(step, 4, 0, 5, 1.5, 2)
        ok &= best.tokens == tokens
        g = greedy(step, cfg, eos=0)
        b1 = beam_search(step, DecodeConfig(beam_width=1, alpha=1.5, block_n=2, max_len=5), eos=0)
        ok &= g == b1
    check("beam search vs exhaustive sequence scoring", bool(ok))

    if verbose:
        print("self-check", "passed" if not failures else f"FAILED: {failures}")
    return not failures
