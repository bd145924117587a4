import logging

from fashionrec.report import gallery, render_gallery, row_key

ALGOS = ("PR", "CNNC", "GMM", "MCL", "TAR")


def retrievals(n_queries=1):
    return {f"q{i}": {a: [f"{a}-{j}" for j in range(12)] for a in ALGOS} for i in range(n_queries)}


def test_one_query_five_by_ten():
    [grid] = gallery(retrievals(), seed=0)
    assert len(grid.rows) == 5 and all(len(r.items) == 10 for r in grid.rows)
    assert sorted(r.label for r in grid.rows) == sorted(ALGOS)


def test_row_order_seeded():
    a = row_key(gallery(retrievals(20), seed=4))
    assert a == row_key(gallery(retrievals(20), seed=4))
    assert a != row_key(gallery(retrievals(20), seed=5))
    assert len({tuple(v) for v in a.values()}) > 1   # shuffled per query


def test_empty_report_has_header():
    html = render_gallery([], {}, seed=0)
    assert "<h1>Recommendation gallery</h1>" in html and "<table>" not in html


def test_missing_images_become_placeholders(caplog):
    grids = gallery(retrievals(), seed=0)
    with caplog.at_level(logging.WARNING):
        html = render_gallery(grids, {}, seed=0)
    assert html.count('class="tile"><div>') == 51
    assert "placeholder" in caplog.text
    assert "CNNC" not in html.replace("CNNC-", "")
