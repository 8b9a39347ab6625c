import logging

log = logging.getLogger(tag)
log.debug(payload)
log.error(failure)
log.info(summary)
log.warning(slowness)
