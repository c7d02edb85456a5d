"""Exception hierarchy.

Every exception carries a stable ``code`` string used by the command line
front end when it reports a validation failure.
"""


class NBCoverError(Exception):
    code = "error"


class InvalidInvolution(NBCoverError):
    code = "invalid_involution"


class DanglingReference(NBCoverError):
    code = "dangling_reference"


class InvalidMorphism(NBCoverError):
    code = "invalid_morphism"


class NotABead(NBCoverError):
    code = "not_a_bead"


class ComponentSwallowed(NBCoverError):
    code = "component_swallowed"


class RootBracketFailure(NBCoverError):
    code = "root_bracket_failure"


class ToleranceAmbiguous(NBCoverError):
    code = "tolerance_ambiguous"


class CapUnverified(NBCoverError):
    code = "cap_unverified"


class TooLarge(NBCoverError):
    code = "too_large"


class ParityMismatch(NBCoverError):
    code = "parity_mismatch"


class HalfLoopUnsupported(NBCoverError):
    code = "half_loop_unsupported"


class GeneratorNotPositive(NBCoverError):
    code = "generator_not_positive"


class IllConditioned(NBCoverError):
    code = "ill_conditioned"


class GuardViolated(UserWarning):
    """Raised as a warning: some k lies outside the sqrt(n)/C window."""
