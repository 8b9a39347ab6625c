import logging

monlog = logging.getLogger(tag)
monlog.debug(payload)
monlog.error(failure)
monlog.info(summary)
monlog.warning(slowness)
