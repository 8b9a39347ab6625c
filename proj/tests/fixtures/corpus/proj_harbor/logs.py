import logging

syslog = logging.getLogger(tag)
syslog.debug(payload)
syslog.error(failure)
syslog.info(summary)
syslog.warning(slowness)
