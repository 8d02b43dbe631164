import logging

logger = logging.getLogger("quatvar.checks")
