"""Semantic-signature decoding toolkit: LSH signatures, bins, two-stage decoding, diversity metrics."""

from ._cod3s import (
    AlignmentError,
    BinIndex,
    ContractError,
    DomainError,
    Error,
    FormatError,
    GatewayError,
    HyperplaneSet,
    InvariantError,
    IoError,
    NotFoundError,
    ParseError,
    __version__,
    approx_cosine,
    bin_medoid,
    build_index,
    count_distinct,
    decode,
    generate_hyperplanes,
    greedy_hamming_filter,
    hamming_distance,
    hash,
    load_embeddings,
    load_hyperplanes,
    mmi_rerank,
    pairwise_diversity,
    save_embeddings,
    sentence_bleu,
    spearman_rho,
    sts_eval,
)
