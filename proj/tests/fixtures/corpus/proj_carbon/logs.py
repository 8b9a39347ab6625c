import logging

audit = logging.getLogger(tag)
audit.debug(payload)
audit.error(failure)
audit.info(summary)
audit.warning(slowness)
