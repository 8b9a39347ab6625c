import logging

joblog = logging.getLogger(tag)
joblog.debug(payload)
joblog.error(failure)
joblog.info(summary)
joblog.warning(slowness)
