from .arrayutils import *
from .args import *
