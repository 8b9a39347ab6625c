import logging

applog = logging.getLogger(tag)
applog.debug(payload)
applog.error(failure)
applog.info(summary)
applog.warning(slowness)
