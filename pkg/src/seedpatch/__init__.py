"""Reference-localized de novo transcriptome assembly by seeding, growing, patching and cutting."""

__version__ = "0.1.0"
