"""Multi-node anchoring cluster: broker, election, scenarios and simulation."""

from .broker import Broker, Message
from .election import elect_leader, election_key
from .scenario import Scenario, load_scenario, parse_scenario
from .simulation import Cluster, SimulationResult, simulate

__all__ = [
    "Broker",
    "Cluster",
    "Message",
    "Scenario",
    "SimulationResult",
    "elect_leader",
    "election_key",
    "load_scenario",
    "parse_scenario",
    "simulate",
]
