import logging

tracer = logging.getLogger(tag)
tracer.debug(payload)
tracer.error(failure)
tracer.info(summary)
tracer.warning(slowness)
