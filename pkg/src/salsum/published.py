"""Scores reported for the fine-tuned systems (percent), keyed by dataset then model."""

COLUMNS = ("rouge1", "rouge2", "rougeL", "rougeLsum", "meteor", "bertscore", "moverscore")

PUBLISHED = {
    "CNN/Dailymail": {
        "BART": (34.85, 13.78, 24.26, 31.93, 24.43, 88.27, 12.50),
        "PEGASUS": (35.89, 15.52, 26.39, 32.37, 29.34, 88.58, 13.67),
        "ProphetNet": (33.82, 13.22, 23.75, 30.78, 24.44, 87.23, 11.68),
        "SEASON": (34.65, 13.89, 24.25, 24.25, 24.77, 87.94, 12.41),
    },
    "SAMSum": {
        "BART": (45.62, 21.53, 35.15, 41.51, 33.40, 90.58, 25.76),
        "PEGASUS": (45.13, 21.10, 35.06, 39.47, 33.90, 90.52, 26.02),
        "ProphetNet": (50.02, 25.08, 39.68, 43.86, 40.26, 89.49, 30.66),
        "SEASON": (50.61, 25.72, 42.25, 42.35, 49.63, 91.82, 31.96),
    },
    "Financial-news based EDT": {
        "BART": (47.15, 28.27, 41.10, 41.14, 35.76, 88.91, 28.15),
        "PEGASUS": (43.16, 25.13, 37.14, 37.15, 31.61, 88.13, 22.45),
        "ProphetNet": (50.63, 31.21, 44.67, 44.77, 38.97, 87.18, 32.02),
        "SEASON": (52.91, 34.64, 48.15, 48.15, 51.20, 90.58, 35.43),
    },
}


def published_reports() -> list[dict]:
    return [
        {"dataset": dataset, "systems": {m: dict(zip(COLUMNS, vals)) for m, vals in models.items()}}
        for dataset, models in PUBLISHED.items()
    ]
