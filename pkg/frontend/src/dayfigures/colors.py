"""Fixed color assignments for the ten emotion categories."""

SENTIMENT_COLORS = {
    "anger": "#DD5A8B",
    "anticipation": "#FFAF4E",
    "disgust": "#96599E",
    "fear": "#81BF8F",
    "joy": "#C79801",
    "negative": "#B7001F",
    "positive": "#008025",
    "sadness": "#72BFF0",
    "surprise": "#6AA507",
    "trust": "#AEA200",
}
