import logging

LOG_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"
_ROOT = "maxvol"


def get_logger(name=None):
    """
    Returns a package logger, attaching the console handler on first use.

    :param name: Dotted module name; nested under the package root logger.
    :return: A configured ``logging.Logger``.
    """
    root = logging.getLogger(_ROOT)
    if not root.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        root.addHandler(handler)
        root.setLevel(logging.INFO)
    if not name:
        return root
    return root.getChild(name.rsplit(".", 1)[-1])


def set_level(level):
    get_logger().setLevel(level)
