from pathlib import Path

import pytest

import pagcid

DATA = Path(__file__).resolve().parent.parent / "data"


def read(name):
    return (DATA / name).read_text()


def test_mag_of_berkson_selection():
    assert "edge a --- b" in pagcid.mag_of(read("selection_berkson.admg"))


def test_canonical_round_trip():
    mag = read("square.mag")
    assert pagcid.mag_of(pagcid.canonical_isadmg(mag)) == pagcid.normalize(mag)


def test_pag_separation_after_hard_intervention():
    assert pagcid.id_separated(read("hard_target.pag"), {"a"}, {"b"}, {"c1", "c2"}, hard={"t"})
    assert not pagcid.id_separated(read("hard_target.admg"), {"a"}, {"b"}, {"c1", "c2", "s"}, hard={"t"})


def test_sidp_failure_certificate():
    r = pagcid.sidp(read("square.mag"), {"a"}, {"b"})
    assert not r["ok"]
    assert r["C"] == {"a", "c1", "c2"}
    assert r["T"] == {"a", "b", "c1", "c2"}


def test_hedge_witness_verifies():
    w = pagcid.hedge_witness(read("square.mag"), {"a"}, {"b"})
    assert w["verified"]
    assert pagcid.mag_of(w["admg"]) == pagcid.normalize(w["mag"])


def test_backdoor_estimand_matches_model():
    scm = read("backdoor.scm")
    pag = pagcid.fci_from_scm(scm)
    r = pagcid.sidp(pag, {"b"}, {"a"})
    assert r["ok"]
    assert pagcid.kernels_agree(pagcid.eval_estimand(r["estimand"], scm), pagcid.effect(scm, {"b"}, {"a"}))


def test_hedge_under_selection():
    h = pagcid.find_hedge(read("selection_hedge.admg"), {"a", "s"}, {"b2"})
    assert h["H"] == {"a", "b2", "c"}
    assert h["H_prime"] == {"a", "c"}


def test_errors_raise_graph_error():
    with pytest.raises(pagcid.GraphError):
        pagcid.normalize("edge a --> b\n")
    assert issubclass(pagcid.GraphError, ValueError)
