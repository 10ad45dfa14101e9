"""Reservoir computing on the unit hypersphere.

Linear reservoirs with an orthogonal (dense or cyclic-shift) recurrent
operator, states renormalised to unit length after every step, and a
softmax readout learned offline (ridge pseudo-inverse) or online (unit-step
cross-entropy gradient descent).
"""

__version__ = "0.1.0"

from ._kernels import get_backend, set_backend, use_backend
from .encoding import Alphabet, EncodingError, build_alphabet, decode, encode, one_hot
from .readout import (
    NormalEquationsAccumulator,
    SingularSystemError,
    accumulate,
    cross_entropy,
    gradient_step,
    softmax_probs,
    solve_from_accumulator,
    solve_offline,
)
from .regimes import (
    TrainedModel,
    TrainReport,
    drive_sequence,
    drive_states,
    recall_associative,
    recall_error,
    recall_generative,
    train_offline_associative,
    train_offline_generative,
    train_online_generative,
)
from .reservoir import (
    CyclicShift,
    DegenerateStateError,
    DenseOrthogonal,
    ModelConfig,
    apply_reservoir,
    init_dense_orthogonal,
    init_input_matrix,
    update_state,
)
from .rng import RandomStream
