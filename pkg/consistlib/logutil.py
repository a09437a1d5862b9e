import logging


class EntityLoggingAdapter(logging.LoggerAdapter):
    def process(self, msg, kwargs):
        return '[%s] %s' % (self.extra['entity'], msg), kwargs


def getLogger(module_name=None):
    """
    Returns a logger appropriate for use in the consistlib
    package. Modules should request a logger using their __name__
    """
    logger_name = 'consistlib'

    if module_name:
        if module_name.startswith(logger_name + '.') or module_name == logger_name:
            logger_name = module_name
        else:
            logger_name = '{}.{}'.format(logger_name, module_name)

    return logging.getLogger(logger_name)


def entity_logger(entity, module_name=None):
    """Logger whose lines are prefixed with `[entity]`, e.g. a check name"""
    return EntityLoggingAdapter(getLogger(module_name), {'entity': entity})
