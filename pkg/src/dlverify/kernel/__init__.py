from .api import (ALL_AXIOMS, ReplayError, apply_axiom, apply_rule,
                  check_proof, close_arith, hilbert_audit, validate_proof)
from .axioms import (EQUIVALENCE_AXIOMS, IMPLICATION_AXIOMS, NoMatch,
                     SideConditionError)
from .close import ModalitiesRemain, NotClosed, sequent_formula
from .proofio import proof_from_json, proof_to_json
from .rules import ALL_RULES, ShapeError
from .sequent import (Justification, Position, PositionError, ProofNode,
                      ProofState, ProofTree, Sequent, init_proof)
