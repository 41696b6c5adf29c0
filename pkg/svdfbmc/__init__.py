"""
svdfbmc is a link-level simulator for SVD-beamformed FS-FBMC/OQAM MIMO
transmission. It compares per-tone beamforming with smoothed beamformers
against SVD-OFDM and subchannel-level SVD-FBMC under frequency-selective
fading.
"""

__version__ = "0.1.0"
