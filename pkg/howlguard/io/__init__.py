from .loaders import *
from .writers import *
