VERSION = ('2026', '10', '17')

__version__ = '.'.join(map(str, VERSION))
