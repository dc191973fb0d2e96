"""Parametrized multiple series: word algebra, evaluation, and numerical
verification of the duality and derivative identities."""

from .words import (
    Cut,
    LinComb,
    Word,
    WordError,
    dual,
    parse_word,
    sigma_b1,
    sigma_b2,
    sigma_eps,
    v_prime_monomials,
    v_y_monomials,
    words_of_weight,
    words_up_to_weight,
)
from .nested_sum import (
    EvalConfig,
    EvalResult,
    IndexWeight,
    InvalidParamsError,
    KernelError,
    Link,
    NestedSumSpec,
    NonConvergentError,
    Prefactor,
    evaluate,
    pochhammer_log,
    tail_extrapolate,
    truncated_sum,
)
from .evaluators import (
    Params,
    eval_Hstar,
    eval_Z,
    eval_Zstar,
    eval_hurwitz,
    eval_lincomb,
)
from .verifier import (
    IdentityCheck,
    SuiteConfig,
    VerificationReport,
    check_derivative_crosslink,
    check_duality,
    check_integral_repr,
    check_prop24,
    check_sum_formula,
    check_thm11_i,
    check_thm11_ii,
    check_thm31,
    run_suite,
)

__version__ = "0.1.0"

__all__ = [
    "Cut",
    "EvalConfig",
    "EvalResult",
    "IdentityCheck",
    "IndexWeight",
    "InvalidParamsError",
    "KernelError",
    "LinComb",
    "Link",
    "NestedSumSpec",
    "NonConvergentError",
    "Params",
    "Prefactor",
    "SuiteConfig",
    "VerificationReport",
    "Word",
    "WordError",
    "check_derivative_crosslink",
    "check_duality",
    "check_integral_repr",
    "check_prop24",
    "check_sum_formula",
    "check_thm11_i",
    "check_thm11_ii",
    "check_thm31",
    "dual",
    "eval_Hstar",
    "eval_Z",
    "eval_Zstar",
    "eval_hurwitz",
    "eval_lincomb",
    "evaluate",
    "parse_word",
    "pochhammer_log",
    "run_suite",
    "sigma_b1",
    "sigma_b2",
    "sigma_eps",
    "tail_extrapolate",
    "truncated_sum",
    "v_prime_monomials",
    "v_y_monomials",
    "words_of_weight",
    "words_up_to_weight",
]
