# Config module: solver constants and CLI flag models
