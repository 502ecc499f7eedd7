"""Linguistic steganography codec with semantic-aware bins coding."""

from ._kernels import BACKEND as KERNEL_BACKEND
from .bins import (
    BinAssignment,
    bits_of,
    build_bins_common,
    build_bins_random,
    build_sabins,
)
from .codec import (
    BitStream,
    StegoParams,
    StegoText,
    embed,
    extract,
    generate_zero_bit,
)
from .keys import SecretKey
from .lm import (
    Distribution,
    GenerationContext,
    NgramProvider,
    RemoteProvider,
    constrained_token,
    greedy_token,
    train_ngram,
    vocab_hash,
)
from .synonyms import SynonymDB, load_synsets, substitution_set
from .tokenizer import BpeModel, FrequencyTable, count_frequencies, decode, encode, train_bpe

__version__ = "0.1.0"
