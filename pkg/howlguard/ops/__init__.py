from .functional import *
from .dynamics import *
from .ops import *
