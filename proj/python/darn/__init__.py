"""Deep autoregressive generative autoencoder.

Thin python surface over the C++ core: architectures, exact and sampled
inference, MDL training and likelihood evaluation.
"""

from ._darn_core import (  # noqa: F401
    Architecture,
    DataError,
    DimensionError,
    EnumerationGuardError,
    ModelParams,
    NumericError,
    StochasticLayerSpec,
    UsageError,
    backward,
    count_multiplications,
    dataset_eval,
    description_length,
    encoder_log_prob,
    exact_log_likelihood,
    format_architecture,
    free_energy_exact,
    free_energy_mc,
    importance_sampling_ll,
    init_params,
    joint_log_prob,
    load_checkpoint,
    parse_architecture,
    sample_decoder,
    sample_encoder,
    save_checkpoint,
    train,
)

__version__ = "0.1.0"
