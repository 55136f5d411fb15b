from .embedding import EmbeddingFileError, EmbeddingTable, bert_score, load_embedding_table, mover_score, word_movers_transport
from .hallucination import mark_novel, novel_ngrams
from .meteor import align as meteor_alignment, meteor
from .rouge import rouge_l, rouge_lsum, rouge_n
from .score import MetricScore
from .transport import TransportResult, optimal_transport

__all__ = [
    "EmbeddingFileError", "EmbeddingTable", "MetricScore", "TransportResult",
    "bert_score", "load_embedding_table", "mark_novel", "meteor", "meteor_alignment",
    "mover_score", "novel_ngrams", "optimal_transport", "rouge_l", "rouge_lsum",
    "rouge_n", "word_movers_transport",
]
