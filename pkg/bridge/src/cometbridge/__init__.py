"""Wire-protocol bridge exposing COMET-family QE models as chunk scorers."""

from .models import CometModel, StubModel, load_model
from .server import BridgeConfig, serve

__version__ = "0.1.0"
