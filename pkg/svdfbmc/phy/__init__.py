"""Physical-layer building blocks: filter, modem, beamformers, channel, coding, QAM."""
