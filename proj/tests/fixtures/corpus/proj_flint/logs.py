import logging

journal = logging.getLogger(tag)
journal.debug(payload)
journal.error(failure)
journal.info(summary)
journal.warning(slowness)
