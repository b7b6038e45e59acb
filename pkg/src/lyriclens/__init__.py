"""lyriclens: lyric intelligence toolkit.

Curates a lyrics corpus, fine-tunes a distilled-transformer classifier for
genre and success, predicts release year from mean-pooled embeddings, and
serves the three predictors through a CLI, an HTTP API, and a dashboard.
"""

__version__ = "0.1.0"
