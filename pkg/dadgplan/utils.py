#!/usr/bin/env python3

import logging
import os
import time

from .errors import ConfigError

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'

TRUE_WORDS = ('1', 'true', 'yes', 'on')
FALSE_WORDS = ('0', 'false', 'no', 'off')


def configure_logging(verbose=0, quiet=False):
    if quiet:
        level = logging.ERROR
    elif verbose >= 2:
        level = logging.DEBUG
    elif verbose == 1:
        level = logging.INFO
    else:
        level = logging.WARNING
    logging.basicConfig(level=level, format=LOG_FORMAT)
    logging.getLogger('dadgplan').setLevel(level)


def read_config(path):
    """ key=value per line, '#' comments; keys use the flag names, dashes or underscores """
    if not os.path.isfile(path):
        raise ConfigError(''.join(['no config file at ', path]))
    settings = {}
    with open(path, 'r') as handle:
        for line_number, raw in enumerate(handle, start=1):
            line = raw.split('#', 1)[0].strip()
            if not line:
                continue
            if '=' not in line:
                raise ConfigError(''.join([str(path), ':', str(line_number), ': expected key=value']))
            key, value = line.split('=', 1)
            key = key.strip().lstrip('-').replace('-', '_')
            if not key:
                raise ConfigError(''.join([str(path), ':', str(line_number), ': empty key']))
            settings[key] = value.strip()
    return settings


def coerce(value, action):
    """ config text -> the type the matching argparse action would have produced """
    if action.const is True and action.nargs == 0:
        word = value.lower()
        if word in TRUE_WORDS:
            return True
        if word in FALSE_WORDS:
            return False
        raise ConfigError(''.join([action.dest, ': expected true or false, got ', value]))
    convert = action.type
    ## -v counts, so the config value is a number
    if convert is None and action.nargs == 0 and isinstance(action.default, int):
        convert = int
    if convert is not None:
        try:
            value = convert(value)
        except (TypeError, ValueError):
            raise ConfigError(''.join([action.dest, ': cannot read ', value])) from None
    if action.choices is not None and value not in action.choices:
        raise ConfigError(''.join([action.dest, ': ', str(value), ' is not one of ', ', '.join(map(str, action.choices))]))
    return value


def config_defaults(settings, parser, known=()):
    """ settings restricted to the parser's own destinations, typed; keys no command knows are an error """
    actions = {action.dest: action for action in parser._actions}
    defaults = {}
    for key, value in settings.items():
        if key not in actions:
            if key in known:
                continue
            raise ConfigError(''.join(['unknown config key ', key]))
        defaults[key] = coerce(value, actions[key])
    return defaults


class Stopwatch:

    def __init__(self):
        self.start = time.perf_counter()

    @property
    def elapsed(self):
        return time.perf_counter() - self.start

    def ms(self):
        return round(self.elapsed * 1000.0, 1)
