from __future__ import annotations

import random

from hypothesis import given
from hypothesis import strategies as st

from evidence_atlas.bucketing import BucketKey, bucket_key, comparable, merge_partitions, partition, poolable
from evidence_atlas.evidence_model import Duration
from generators import canonical_claims, claim, with_key_noise

A = claim(card_id="a")
B = claim(card_id="b", scale="log_ratio", theta=-0.315, ci=(-0.545, -0.083))
C = claim(card_id="c", m_type="RR", theta=0.76, ci=(0.61, 0.94))
MD = claim(card_id="d", m_type="MD", scale="difference", theta=0.2, ci=(0.1, 0.3))


def test_worked_example_keys():
    assert bucket_key(A) == bucket_key(B) == bucket_key(C)
    assert bucket_key(A).encode() == "t2dm|sglt2i|mace|fixed:6|binary|ratio"
    assert bucket_key(MD) != bucket_key(A)


def test_key_encoding_round_trip():
    k = bucket_key(A, "no_canonical")
    assert k.encode() == "t2dm|sglt2i|mace|fixed:6|binary|ratio|HR|ratio"
    assert BucketKey.decode(k.encode()) == k
    assert BucketKey.decode("unknown-pop|x|y|unknown:-|binary|ratio").tau_class.h_bin is None


def test_comparability_and_poolability():
    assert comparable(A, B) and comparable(A, A)
    thirty_day = claim(horizon=Duration(30, "day"))
    ten_year = claim(horizon=Duration(10, "year"))
    assert not comparable(thirty_day, ten_year)
    assert poolable(A, B)
    assert comparable(A, C) and not poolable(A, C)
    assert not poolable(A, MD)


def test_partition_examples():
    buckets = partition([C, A, B])
    assert len(buckets) == 1
    assert [c.claim_id for c in buckets[0].claims] == ["a#0", "b#0", "c#0"]
    assert len(partition([A, MD])) == 2
    assert partition([]) == []


def test_ablation_keys():
    assert bucket_key(A, "no_canonical") != bucket_key(B, "no_canonical")
    twelve = claim(horizon=Duration(12, "month"))
    year = claim(horizon=Duration(1, "year"))
    assert bucket_key(twelve) == bucket_key(year)
    assert bucket_key(twelve, "no_align_tau") != bucket_key(year, "no_align_tau")
    per_unit = claim(c_type="per_unit")
    assert bucket_key(per_unit) != bucket_key(A)
    assert bucket_key(per_unit, "weak_key") == bucket_key(A, "weak_key")


@given(st.lists(canonical_claims, max_size=12), st.randoms(use_true_random=False))
def test_partition_is_order_invariant(claims, rnd):
    claims = list({c.claim_id: c for c in claims}.values())  # claim ids are unique in a corpus
    shuffled = list(claims)
    rnd.shuffle(shuffled)
    assert partition(claims) == partition(shuffled)
    assert sum(len(b.claims) for b in partition(claims)) == len(claims)


@given(st.lists(canonical_claims, max_size=12), st.integers(0, 12))
def test_merge_of_partial_groupings(claims, cut):
    def groups(cs):
        out = {}
        for c in cs:
            out.setdefault(bucket_key(c), []).append(c)
        return out

    claims = list({c.claim_id: c for c in claims}.values())
    left, right = claims[:cut], claims[cut:]
    assert merge_partitions([groups(left), groups(right)]) == partition(claims)
    assert merge_partitions([groups(right), groups(left)]) == partition(claims)


@given(canonical_claims, canonical_claims, canonical_claims)
def test_equivalence_relation(a, b, c):
    assert comparable(a, a)
    assert comparable(a, b) == comparable(b, a)
    if comparable(a, b) and comparable(b, c):
        assert comparable(a, c)
    if poolable(a, b):
        assert comparable(a, b)


@given(canonical_claims, st.integers(0, 2**32))
def test_key_ignores_numbers_and_provenance(cc, seed):
    assert bucket_key(with_key_noise(cc, random.Random(seed))) == bucket_key(cc)
