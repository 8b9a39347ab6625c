import logging

tlog = logging.getLogger(tag)
tlog.debug(payload)
tlog.error(failure)
tlog.info(summary)
tlog.warning(slowness)
