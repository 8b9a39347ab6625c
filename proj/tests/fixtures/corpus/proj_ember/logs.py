import logging

reporter = logging.getLogger(tag)
reporter.debug(payload)
reporter.error(failure)
reporter.info(summary)
reporter.warning(slowness)
