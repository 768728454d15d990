from fractions import Fraction

import pytest

from splverify.casestudy import BUNDLES, bundle_path, expected_interactions
from splverify.productline import typecheck_product_line, validate_specs


def test_bundle_files():
    root = bundle_path()
    assert (root / "manifest.yaml").is_file()
    assert len(list(root.glob("*.fml"))) == 10
    assert BUNDLES == ("email",)
    with pytest.raises(KeyError):
        bundle_path("nope")


def test_forty_products(email_line):
    assert len(email_line.fm.enumerate_products()) == 40


def test_interaction_table(email_line):
    ids = [it.id for it in expected_interactions(email_line)]
    assert ids == [0, 1, 3, 4, 6, 7, 8, 9, 11, 27]


@pytest.mark.parametrize("ident, ratio", [(6, (40, 40)), (7, (8, 40))])
def test_ratios(email_brute, email_line, ident, ratio):
    it = next(i for i in email_line.interactions if i.id == ident)
    tab = email_brute.tables[it.automaton]
    assert (tab.b, tab.n) == ratio


def test_interaction_pairs_violate_together(email_brute, email_line):
    for it in email_line.interactions:
        for p in email_brute.tables[it.automaton].violating_products():
            assert set(it.features) <= p, it.id


def test_well_typed(email_line):
    assert typecheck_product_line(email_line.modules, email_line.fm, email_line.entry).ok


def test_specs_valid(email_line):
    assert validate_specs(email_line) == []


def test_single_row_is_rarest(email_report):
    row = email_report.single()
    assert Fraction(row.b, row.n) == min(Fraction(r.b, r.n) for r in email_report.detection)
