from .params import *
from .state import *
from .diagnosis import *
from .scenario import *
