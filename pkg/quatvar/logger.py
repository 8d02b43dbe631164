import logging

logger = logging.getLogger("quatvar")
