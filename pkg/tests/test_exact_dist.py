"""Distribution laws: determinant route, product route, group averages."""

import math

import pytest
from hypothesis import given, settings, strategies as st

from lppdet.errors import TruncationError, ValidationError, VerificationError
from lppdet.exact_dist import (
    DistTable,
    build_dist_table,
    prob_external,
    prob_lattice,
    prob_square,
    prob_square_product,
    prob_triangle_fs_via_ogroup,
    prob_triangle_odd,
    scaled_cdf,
    square_opuc,
    symmetrized_lattice_prob,
    weyl_ogroup_expectation,
)
from lppdet.symbols import ModelKind, ModelSpec


def test_square_closed_form_first_levels(opuc_t1):
    """At t = 1, P(L <= 0) = e^{-1} and P(L <= 1) = e^{-1} I_0(2)."""
    from scipy.special import iv

    assert prob_square(1.0, 0, opuc_t1) == pytest.approx(math.exp(-1.0), rel=1e-14)
    assert prob_square(1.0, 1, opuc_t1) == pytest.approx(
        math.exp(-1.0) * float(iv(0, 2.0)), rel=1e-13
    )


def test_square_frozen_table(opuc_t1):
    expected = {
        0: 0.36787944117144233,
        1: 0.8386125671260257,
        2: 0.9809076893280115,
        3: 0.9987407159242524,
        4: 0.9999474581266296,
        5: 0.9999984914527477,
    }
    for ell, value in expected.items():
        assert prob_square(1.0, ell, opuc_t1) == pytest.approx(value, abs=1e-12)


def test_square_out_of_range(opuc_t1):
    assert prob_square(1.0, -1, opuc_t1) == 0.0
    with pytest.raises(ValidationError):
        prob_square(1.0, opuc_t1.cutoff + 5, opuc_t1)


@settings(deadline=None, max_examples=20)
@given(t=st.floats(0.2, 3.0))
def test_square_product_route_agrees(t):
    data = square_opuc(t)
    for ell in range(0, 6):
        direct = prob_square(t, ell, data)
        via_product, bound = prob_square_product(t, ell, data)
        assert via_product == pytest.approx(direct, abs=1e-11 + bound)


@settings(deadline=None, max_examples=20)
@given(t=st.floats(0.1, 2.5))
def test_square_cdf_monotone_in_threshold(t):
    data = square_opuc(t)
    values = [prob_square(t, ell, data) for ell in range(0, 8)]
    assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))
    assert values[-1] <= 1.0 + 1e-12


def test_triangle_frozen_values(opuc_t1):
    assert float(prob_triangle_odd(1.0, 0.0, 0, opuc_t1)) == pytest.approx(
        0.9359257154242638, abs=1e-10
    )
    assert float(prob_triangle_odd(1.0, 0.5, 0, opuc_t1)) == pytest.approx(
        0.7838338208091404, abs=1e-10
    )
    assert float(prob_triangle_odd(1.0, 0.5, 1, opuc_t1)) == pytest.approx(
        0.9933828999153463, abs=1e-10
    )
    assert float(prob_triangle_odd(1.0, 1.5, 0, opuc_t1)) == pytest.approx(
        0.44740253437232946, abs=1e-10
    )


def test_triangle_needs_room_for_the_tail():
    small = square_opuc(1.0, cutoff=8)
    with pytest.raises(ValidationError):
        prob_triangle_odd(1.0, 0.5, 0, small)
    # enough factors to run, not enough to certify 1e-12
    mid = square_opuc(1.0, cutoff=12)
    with pytest.raises(TruncationError):
        prob_triangle_odd(1.0, 0.5, 0, mid)


def test_triangle_alpha_zero_matches_symmetrized_square(opuc_t1):
    """Without a boundary rate the odd law must match the plain
    orthogonal-group average of e^{tU}."""
    lhs = float(prob_triangle_odd(1.0, 0.0, 1, opuc_t1))
    rhs = prob_triangle_fs_via_ogroup(1.0, 0.0, 3)
    assert lhs == pytest.approx(rhs, abs=1e-10)


def test_external_frozen_values(opuc_t1):
    expected = {1: 0.5895222935327221, 2: 0.8943693866451398, 3: 0.9829853441225228}
    for ell, value in expected.items():
        assert float(prob_external(1.0, 0.3, 0.6, ell, opuc_t1)) == pytest.approx(
            value, abs=1e-10
        )


def test_external_reduces_to_square_at_zero_rates(opuc_t1):
    for ell in (1, 2, 3):
        assert float(prob_external(1.0, 0.0, 0.0, ell, opuc_t1)) == pytest.approx(
            prob_square(1.0, ell, opuc_t1), abs=1e-11
        )


def test_external_symmetric_in_the_two_rates(opuc_t1):
    a = float(prob_external(1.0, 0.3, 0.6, 2, opuc_t1))
    b = float(prob_external(1.0, 0.6, 0.3, 2, opuc_t1))
    assert a == pytest.approx(b, abs=1e-11)


def test_external_singular_direction(opuc_t1):
    """alpha_plus * alpha_minus = 1 hits a removable singularity; the
    symmetric-step limit must stay close to nearby regular evaluations."""
    at = float(prob_external(1.0, 2.0, 0.5, 2, opuc_t1))
    assert at == pytest.approx(0.5510366937860481, abs=1e-8)
    near = float(prob_external(1.0, 2.0, 0.5 - 2e-4, 2, opuc_t1))
    assert at == pytest.approx(near, abs=1e-4)


@settings(deadline=None, max_examples=40)
@given(q=st.floats(0.05, 0.9), qp=st.floats(0.05, 0.9), ell=st.integers(0, 6))
def test_lattice_a_single_cell_closed_form(q, qp, ell):
    """One geometric cell: P(L <= ell) = P(X <= ell) = 1 - (q q')^{ell+1}."""
    if q * qp >= 0.999:
        return
    model = ModelSpec(kind=ModelKind.LATTICE_A, row_params=(q,), col_params=(qp,))
    assert prob_lattice(model, ell) == pytest.approx(
        1.0 - (q * qp) ** (ell + 1), abs=1e-11
    )


@settings(deadline=None, max_examples=40)
@given(q=st.floats(0.05, 0.9), qp=st.floats(0.05, 0.9))
def test_lattice_b_single_cell_closed_form(q, qp):
    """One Bernoulli cell with odds p: P(L <= 0) = 1/(1+p), P(L <= 1) = 1."""
    p = q * qp
    model = ModelSpec(kind=ModelKind.LATTICE_B, row_params=(q,), col_params=(qp,))
    assert prob_lattice(model, 0) == pytest.approx(1.0 / (1.0 + p), abs=1e-11)
    assert prob_lattice(model, 1) == pytest.approx(1.0, abs=1e-11)


def test_lattice_frozen_tables():
    la = ModelSpec(kind=ModelKind.LATTICE_A, row_params=(0.3, 0.2), col_params=(0.25, 0.2))
    expected_a = [0.792984, 0.9737843519999998, 0.9973034644559999, 0.9997514869483672]
    for ell, value in enumerate(expected_a):
        assert prob_lattice(la, ell) == pytest.approx(value, abs=1e-12)

    lb = ModelSpec(kind=ModelKind.LATTICE_B, row_params=(0.6,), col_params=(0.5, 0.4, 0.3))
    expected_b = [0.5257181309669008, 0.9042351852630693, 0.9931866930226686, 1.0]
    for ell, value in enumerate(expected_b):
        assert prob_lattice(lb, ell) == pytest.approx(value, abs=1e-12)

    lc = ModelSpec(kind=ModelKind.LATTICE_C, row_params=(0.3, 0.2), col_params=(0.25, 0.2))
    expected_c = [0.792984, 0.9969999999999999, 1.0]
    for ell, value in enumerate(expected_c):
        assert prob_lattice(lc, ell) == pytest.approx(value, abs=1e-12)


def test_lattice_c_saturates_at_min_side():
    # at most one point per cell and per strict chain step, so the
    # chain length cannot exceed min(rows, cols)
    lc = ModelSpec(kind=ModelKind.LATTICE_C, row_params=(0.3, 0.2), col_params=(0.25, 0.2))
    assert prob_lattice(lc, 2) == pytest.approx(1.0, abs=1e-12)
    assert prob_lattice(lc, 5) == pytest.approx(1.0, abs=1e-12)


def test_lines_frozen_values():
    ld = ModelSpec(kind=ModelKind.POISSON_LINES_D, t=1.0, col_params=(0.5, 0.4))
    le = ModelSpec(kind=ModelKind.POISSON_LINES_E, t=1.0, col_params=(0.5, 0.4))
    # both share P(L <= 0) = e^{-t sum q}
    assert prob_lattice(ld, 0) == pytest.approx(math.exp(-0.9), abs=1e-12)
    assert prob_lattice(le, 0) == pytest.approx(math.exp(-0.9), abs=1e-12)
    assert prob_lattice(ld, 1) == pytest.approx(0.8131393194811982, abs=1e-12)
    assert prob_lattice(le, 1) == pytest.approx(0.9254775913276625, abs=1e-12)
    # one point per line caps the strict variant at the line count
    assert prob_lattice(le, 2) == pytest.approx(1.0, abs=1e-10)


def test_lines_d_level_one_closed_form():
    """P(L <= 1) for the repeated-lines model equals
    e^{-t sum q} * prod over nonempty-line subsets... reduced to the
    single-line case: (1 + t q) e^{-t q}."""
    ld = ModelSpec(kind=ModelKind.POISSON_LINES_D, t=1.0, col_params=(0.7,))
    assert prob_lattice(ld, 1) == pytest.approx((1.0 + 0.7) * math.exp(-0.7), abs=1e-12)
    le = ModelSpec(kind=ModelKind.POISSON_LINES_E, t=1.0, col_params=(0.7,))
    assert prob_lattice(le, 1) == pytest.approx(1.0, abs=1e-12)


def test_ogroup_dimension_one_closed_form():
    """O(1) = {+1, -1}, so the average is evaluated by hand."""
    expectation = weyl_ogroup_expectation(1.0, 0.5, 1)
    closed = 0.5 * (1.5 * math.e + 0.5 / math.e)
    assert expectation == pytest.approx(closed, rel=1e-13)


def test_ogroup_node_count_stability():
    coarse = weyl_ogroup_expectation(1.0, 0.5, 5, n_nodes=32)
    fine = weyl_ogroup_expectation(1.0, 0.5, 5, n_nodes=64)
    assert coarse == pytest.approx(fine, rel=1e-12)


def test_symmetrized_lattice_frozen_tables():
    asym = ModelSpec(kind=ModelKind.LATTICE_A_SYM, alpha=0.4, row_params=(0.3, 0.25))
    expected = [0.7326, 0.948717, 0.9915924150000001, 0.9987406679249312]
    for ell, value in enumerate(expected):
        assert symmetrized_lattice_prob(asym, ell) == pytest.approx(value, abs=1e-11)
    # the zero level is a pure no-point event with a closed form
    manual = (1 - 0.4 * 0.3) * (1 - 0.4 * 0.25) * (1 - 0.3 * 0.25)
    assert symmetrized_lattice_prob(asym, 0) == pytest.approx(manual, abs=1e-13)

    csym = ModelSpec(kind=ModelKind.LATTICE_C_SYM, alpha=0.25, row_params=(0.3, 0.25))
    expected_c = [0.6909028727770178, 0.9819425444596444, 1.0]
    for ell, value in enumerate(expected_c):
        assert symmetrized_lattice_prob(csym, ell) == pytest.approx(value, abs=1e-11)


def test_scaled_cdf_edges():
    data = square_opuc(4.0)
    assert scaled_cdf(4.0, -50.0, data) == 0.0
    assert scaled_cdf(4.0, 10.0, data) == pytest.approx(1.0, abs=1e-9)
    mid = scaled_cdf(4.0, 0.0, data)
    assert 0.0 < mid < 1.0


def test_dist_table_round_trip_and_rows():
    model = ModelSpec(kind=ModelKind.POISSON_SQUARE, t=1.0)
    table = build_dist_table(model, 5)
    rows = table.csv_rows()
    assert [r[0] for r in rows] == list(range(6))
    assert rows[1][1] == pytest.approx(0.8386125671260257, abs=1e-12)
    again = DistTable.from_json(table.to_json())
    assert again.entries == table.entries
    assert again.model == table.model


def test_dist_table_monotone_guard():
    model = ModelSpec(kind=ModelKind.POISSON_SQUARE, t=1.0)
    bad = DistTable(
        model=model,
        entries={0: (math.log(0.5), 0.5), 1: (math.log(0.4), 0.4)},
        truncation_info={},
    )
    with pytest.raises(VerificationError):
        bad.check_monotone()


def test_build_dist_table_triangle_reports_odd_support():
    model = ModelSpec(kind=ModelKind.POISSON_TRIANGLE, t=1.0, alpha=0.5)
    table = build_dist_table(model, 7)
    assert sorted(table.entries) == [1, 3, 5, 7]


def test_triangle_and_fs_routes_agree_on_shared_thresholds():
    fs = ModelSpec(kind=ModelKind.TRIANGLE_POISSON_FS, t=1.0, alpha=0.5)
    table = build_dist_table(fs, 6)
    data = square_opuc(1.0)
    for thr in (1, 3, 5):
        det_route = float(prob_triangle_odd(1.0, 0.5, (thr - 1) // 2, data))
        assert table.entries[thr][1] == pytest.approx(det_route, abs=1e-9)
