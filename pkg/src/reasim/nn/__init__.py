from . import tensor
from .gradcheck import check_gradients
from .layers import (
    MLP,
    Attention,
    Conv1d,
    Dense,
    Embedding,
    GRUCell,
    LayerNorm,
    LSTMCell,
    Module,
    kaiming_uniform,
    orthogonal,
    xavier_uniform,
)
from .model import (
    WEIGHTS_VERSION,
    load_weights,
    read_manifest,
    save_weights,
    weights_hash,
)
from .optim import Adam, clip_grad_norm
from .tensor import (
    Tensor,
    concat,
    conv1d,
    grad_enabled,
    layer_norm,
    max_pool1d,
    no_grad,
    relu,
    sigmoid,
    softmax,
    stack,
    take_rows,
    tanh,
    texp,
    tlog,
    tmean,
    tpow,
    tsum,
    upsample1d,
)
