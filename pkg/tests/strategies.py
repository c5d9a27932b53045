"""Hypothesis strategies shared by the test modules."""
from hypothesis import strategies as st

from rigorcert.expr import Expr, const, var

LEAVES = st.one_of(
    st.sampled_from([var(0), var(1)]),
    st.decimals(min_value=-3, max_value=3, places=2, allow_nan=False).map(const),
)


def _extend(children):
    return st.one_of(
        st.tuples(st.sampled_from(["add", "sub", "mul", "div"]), children, children).map(
            lambda t: Expr(t[0], (t[1], t[2]))),
        st.tuples(st.sampled_from(["sin", "cos", "atan", "sqrt", "atn", "asin", "acos"]), children).map(
            lambda t: Expr(t[0], (t[1],))),
        st.tuples(children, st.integers(0, 4)).map(lambda t: Expr("pow", (t[0],), t[1])),
        children.map(lambda c: Expr("neg", (c,))),
    )


expressions = st.recursive(LEAVES, _extend, max_leaves=8)
