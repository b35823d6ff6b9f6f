import logging

logger = logging.getLogger(__name__)

__version__ = "0.4.0"
