"""rtlmark: keyed, semantics-preserving watermarks for Verilog RTL that
persist through logic synthesis into the gate-level netlist."""

from .ast_nodes import Ast, SourceText
from .detector import DetectionReport, NullModel, calibrate, detect
from .embedder import (EmbedObjective, TransformPlan, WatermarkedDocument,
                       embed, plan)
from .errors import (BadFraming, EmptyCorpus, InsufficientCapacity,
                     ParseError, PayloadTooLarge, RtlmarkError, SiteStale,
                     ToolFailed, ToolMissing, ToolTimeout,
                     UnsupportedConstruct)
from .keys import WatermarkKey, generate_key, key_from_seed, load_key, save_key
from .parser import parse, parse_text
from .payload import Payload, decode_payload, encode_payload
from .printer import print_ast
from .symbols import SymbolTable, resolve

__version__ = "0.1.0"
