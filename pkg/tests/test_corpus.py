import numpy as np
import pytest

from pcalc.corpus import corpus_entry, corpus_list, smooth_entries
from pcalc.errors import UsageError
from pcalc.expr import evaluate


class TestLookup:
    def test_size_and_order(self):
        entries = corpus_list()
        assert len(entries) == 12
        names = [e.name for e in entries]
        assert names[:3] == ["linear", "square", "cube"]
        assert names[-2:] == ["abs", "constant"]
        assert len(set(names)) == 12

    def test_by_name(self):
        e = corpus_entry("gauss")
        assert e.name == "gauss"
        assert evaluate(e.f, {"t": 0.0}) == 1.0

    def test_unknown_name_lists_known(self):
        with pytest.raises(UsageError) as exc:
            corpus_entry("cubic")
        msg = str(exc.value)
        assert "cubic" in msg
        assert "cube" in msg and "gauss" in msg

    def test_smooth_subset(self):
        names = {e.name for e in smooth_entries()}
        assert "abs" not in names
        assert names == {e.name for e in corpus_list()} - {"abs"}


class TestDerivatives:
    def test_only_abs_lacks_one(self):
        for e in corpus_list():
            assert (e.fprime is None) == (e.name == "abs")

    def test_fprime_matches_central_difference(self):
        rng = np.random.default_rng(23)
        h = 1e-6
        for e in corpus_list():
            if e.fprime is None:
                continue
            lo, hi = e.domain
            for t in rng.uniform(lo + 0.1, min(hi, 3.0), size=5):
                t = float(t)
                num = (evaluate(e.f, {"t": t + h})
                       - evaluate(e.f, {"t": t - h})) / (2.0 * h)
                sym = evaluate(e.fprime, {"t": t})
                assert sym == pytest.approx(num, rel=1e-5, abs=1e-5), e.name

    def test_domains_are_evaluable(self):
        for e in corpus_list():
            lo, hi = e.domain
            assert lo < hi
            for t in np.linspace(lo + 1e-3, hi, 7):
                v = evaluate(e.f, {"t": float(t)})
                assert np.isfinite(v), e.name
