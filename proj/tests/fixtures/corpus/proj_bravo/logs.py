import logging

logger = logging.getLogger(tag)
logger.debug(payload)
logger.error(failure)
logger.info(summary)
logger.warning(slowness)
