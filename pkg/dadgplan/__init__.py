from . import errors
from . import pddl_classes
from . import pddlparse
from . import grounding
from . import decompose
from . import search
from . import checks
from . import external
from . import corpus
from . import llm
from . import assist
from . import orchestrator
from . import bench
from . import generate
from . import utils

__version__ = '0.1.0'
