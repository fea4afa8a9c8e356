"""
Scenario Configuration
Flat ``key = value`` scenario files, YAML experiment matrices and the
constraint checks both must satisfy before a simulation may run.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

import numpy as np
import yaml

from src.mesh.topology import INTERFERENCE_MODELS, Topology, random_topology

ALGORITHMS = ('rca', 'static', 'single')
PLACEMENTS = ('random', 'grid')
ENDPOINT_POLICIES = ('random_pairs', 'fixed_list')
SWEEP_KEYS = ('rate', 'flows')
RCA_FALLBACKS = ('shared', 'none')

##command


class ConfigError(ValueError):
    """Scenario or matrix problem, located by file and line when known."""

    def __init__(self, message: str, path: Optional[Union[str, Path]] = None, line: Optional[int] = None):
        self.path = str(path) if path is not None else None
        self.line = line
        where = ''
        if self.path and line:
            where = f"{self.path}:{line}: "
        elif self.path:
            where = f"{self.path}: "
        elif line:
            where = f"line {line}: "
        super().__init__(f"{where}{message}")


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ('1', 'true', 'yes', 'on'):
        return True
    if low in ('0', 'false', 'no', 'off'):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _parse_optional_int(text: str) -> Optional[int]:
    return None if text.strip().lower() in ('', 'none') else int(text)


def _parse_flow_list(text: str) -> Tuple[Tuple[int, int], ...]:
    pairs = []
    for item in text.split(','):
        item = item.strip()
        if not item:
            continue
        src, sep, dst = item.partition('>')
        if not sep:
            raise ValueError(f"flow entries look like 'src>dst', got {item!r}")
        pairs.append((int(src), int(dst)))
    return tuple(pairs)


@dataclass(frozen=True)
class Scenario:
    """One simulation set-up. Defaults give the 30-node, 1200 m x 1200 m mesh with four channels."""

    nodes: int = 30
    area_x: float = 1200.0
    area_y: float = 1200.0
    reception_range: float = 250.0
    channels: int = 4
    interfaces: int = 4
    placement: str = 'random'
    topology_seed: Optional[int] = None
    algorithm: str = 'rca'
    flows: int = 4
    rate: float = 20.0
    packet_size: int = 512
    duration: float = 50.0
    queue_cap: int = 10
    seed: int = 0
    flow_endpoint_policy: str = 'random_pairs'
    flow_list: Tuple[Tuple[int, int], ...] = ()
    link_rate: float = 2e6
    buffer_cap: int = 50
    wait_timeout: float = 2.0
    retry_interval: float = 1.0
    cbr_jitter: float = 0.5
    flow_start_window: float = 1.0
    interference_model: str = 'trca'
    tpre_rule: str = 'accumulate'
    min_hops: int = 2
    control_overhead: bool = False
    rca_fallback: str = 'shared'

    @property
    def airtime(self) -> float:
        return self.packet_size * 8 / self.link_rate

    def validate(self, lines: Optional[Dict[str, int]] = None, path: Optional[Union[str, Path]] = None) -> 'Scenario':
        lines = lines or {}

        def fail(key: str, message: str):
            raise ConfigError(message, path, lines.get(key))

        if self.nodes < 1:
            fail('nodes', f"nodes must be >= 1 (got {self.nodes})")
        if self.area_x <= 0 or self.area_y <= 0:
            fail('area_x' if self.area_x <= 0 else 'area_y', "area dimensions must be positive")
        if self.reception_range <= 0:
            fail('range', f"range must be positive (got {self.reception_range})")
        if self.channels <= 1:
            fail('channels', f"channels must be > 1 (got C={self.channels}); a link needs C > 1")
        if self.interfaces < 1:
            fail('interfaces', f"interfaces must be >= 1 (got K={self.interfaces})")
        if self.channels < self.interfaces:
            fail('channels' if 'channels' in lines else 'interfaces',
                 f"channels (C={self.channels}) must be >= interfaces (K={self.interfaces}): "
                 "a feasible assignment needs C >= K")
        if self.placement not in PLACEMENTS:
            fail('placement', f"placement must be one of {PLACEMENTS} (got {self.placement!r})")
        if self.algorithm not in ALGORITHMS:
            fail('algorithm', f"algorithm must be one of {ALGORITHMS} (got {self.algorithm!r})")
        if self.flows < 0:
            fail('flows', f"flows must be >= 0 (got {self.flows})")
        if not self.rate > 0:
            fail('rate', f"rate must be > 0 (got {self.rate})")
        if self.packet_size <= 0:
            fail('packet_size', f"packet_size must be positive (got {self.packet_size})")
        if not self.duration > 0:
            fail('duration', f"duration must be > 0 (got {self.duration})")
        if self.queue_cap < 1:
            fail('queue_cap', f"queue_cap must be >= 1 (got {self.queue_cap})")
        if self.flow_endpoint_policy not in ENDPOINT_POLICIES:
            fail('flow_endpoint_policy', f"flow_endpoint_policy must be one of {ENDPOINT_POLICIES}")
        if self.flow_endpoint_policy == 'fixed_list':
            if len(self.flow_list) < self.flows:
                fail('flow_list', f"fixed_list needs at least {self.flows} entries (got {len(self.flow_list)})")
            for src, dst in self.flow_list:
                if src == dst or not (0 <= src < self.nodes and 0 <= dst < self.nodes):
                    fail('flow_list', f"invalid flow {src}>{dst} for {self.nodes} nodes")
        if self.link_rate <= 0:
            fail('link_rate', "link_rate must be positive")
        if self.buffer_cap < 1:
            fail('buffer_cap', "buffer_cap must be >= 1")
        if self.wait_timeout <= 0:
            fail('wait_timeout', "wait_timeout must be positive")
        if self.retry_interval <= 0:
            fail('retry_interval', "retry_interval must be positive")
        if not (0.0 <= self.cbr_jitter < 1.0):
            fail('cbr_jitter', "cbr_jitter is a fraction of the packet gap in [0, 1)")
        if self.flow_start_window < 0 or self.flow_start_window >= self.duration:
            fail('flow_start_window', "flow_start_window must lie in [0, duration)")
        if self.interference_model not in INTERFERENCE_MODELS:
            fail('interference_model', f"interference_model must be one of {INTERFERENCE_MODELS}")
        if self.tpre_rule not in ('accumulate', 'literal'):
            fail('tpre_rule', "tpre_rule must be 'accumulate' or 'literal'")
        if self.min_hops < 1:
            fail('min_hops', "min_hops must be >= 1")
        if self.rca_fallback not in RCA_FALLBACKS:
            fail('rca_fallback', f"rca_fallback must be one of {RCA_FALLBACKS} (got {self.rca_fallback!r})")
        return self

    def replace(self, **changes) -> 'Scenario':
        return dataclasses.replace(self, **changes).validate()

    def build_topology(self, seed: Optional[int] = None) -> Topology:
        """Place nodes; the run seed is used when no topology_seed is configured."""
        placement_seed = self.topology_seed if self.topology_seed is not None else (seed if seed is not None else self.seed)
        area = (self.area_x, self.area_y)
        if self.placement == 'grid':
            cols = math.ceil(math.sqrt(self.nodes))
            rows = math.ceil(self.nodes / cols)
            sx, sy = self.area_x / cols, self.area_y / rows
            pos = np.array([((i % cols + 0.5) * sx, (i // cols + 0.5) * sy) for i in range(self.nodes)])
            return Topology(pos, interfaces=self.interfaces, channels=self.channels,
                            reception_range=self.reception_range, area=area,
                            interference_model=self.interference_model)
        return random_topology(self.nodes, area, self.reception_range, self.channels, self.interfaces,
                               seed=placement_seed, interference_model=self.interference_model)

    def to_items(self) -> List[Tuple[str, str]]:
        """(key, value) pairs in file syntax; parse_scenario_text reads them back."""
        items = []
        for key, (attr, _) in _KEYS.items():
            value = getattr(self, attr)
            if attr == 'flow_list':
                value = ', '.join(f"{s}>{d}" for s, d in value)
            elif value is None:
                value = 'none'
            elif isinstance(value, bool):
                value = 'true' if value else 'false'
            items.append((key, str(value)))
        return items


_KEYS: Dict[str, Tuple[str, Callable[[str], Any]]] = {
    'nodes': ('nodes', int),
    'area_x': ('area_x', float),
    'area_y': ('area_y', float),
    'range': ('reception_range', float),
    'channels': ('channels', int),
    'interfaces': ('interfaces', int),
    'placement': ('placement', str),
    'topology_seed': ('topology_seed', _parse_optional_int),
    'algorithm': ('algorithm', str),
    'flows': ('flows', int),
    'rate': ('rate', float),
    'packet_size': ('packet_size', int),
    'duration': ('duration', float),
    'queue_cap': ('queue_cap', int),
    'seed': ('seed', int),
    'flow_endpoint_policy': ('flow_endpoint_policy', str),
    'flow_list': ('flow_list', _parse_flow_list),
    'link_rate': ('link_rate', float),
    'buffer_cap': ('buffer_cap', int),
    'wait_timeout': ('wait_timeout', float),
    'retry_interval': ('retry_interval', float),
    'cbr_jitter': ('cbr_jitter', float),
    'flow_start_window': ('flow_start_window', float),
    'interference_model': ('interference_model', str),
    'tpre_rule': ('tpre_rule', str),
    'min_hops': ('min_hops', int),
    'control_overhead': ('control_overhead', _parse_bool),
    'rca_fallback': ('rca_fallback', str),
}


def parse_scenario_text(text: str, path: Optional[Union[str, Path]] = None) -> Scenario:
    values: Dict[str, Any] = {}
    lines: Dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition('=')
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", path, lineno)
        if key not in _KEYS:
            raise ConfigError(f"unknown key {key!r}", path, lineno)
        if key in lines:
            raise ConfigError(f"duplicate key {key!r} (first set on line {lines[key]})", path, lineno)
        attr, parse = _KEYS[key]
        try:
            values[attr] = parse(value)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}", path, lineno) from exc
        lines[key] = lineno
    return Scenario(**values).validate(lines, path)


def parse_scenario(path: Union[str, Path]) -> Scenario:
    path = Path(path)
    if not path.exists():
        raise ConfigError("scenario file not found", path)
    return parse_scenario_text(path.read_text(encoding='utf8'), path)


def format_scenario(scenario: Scenario) -> str:
    return ''.join(f"{key} = {value}\n" for key, value in scenario.to_items())


@dataclass(frozen=True)
class ExperimentMatrix:
    base: Scenario
    sweep_key: str
    sweep_values: Tuple[Any, ...]
    algorithms: Tuple[str, ...] = ALGORITHMS
    seeds: Tuple[int, ...] = tuple(range(10))
    workers: int = 1

    def __post_init__(self):
        if self.sweep_key not in SWEEP_KEYS:
            raise ConfigError(f"sweep_key must be one of {SWEEP_KEYS} (got {self.sweep_key!r})")
        for name in ('sweep_values', 'algorithms', 'seeds'):
            if not getattr(self, name):
                raise ConfigError(f"{name} must not be empty")
        bad = [a for a in self.algorithms if a not in ALGORITHMS]
        if bad:
            raise ConfigError(f"unknown algorithm(s) {bad}; choose from {ALGORITHMS}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    def cells(self) -> List[Tuple[str, Any, int]]:
        """Every (algorithm, sweep value, seed) cell in CSV row order."""
        return sorted(((a, v, s) for a in self.algorithms for v in self.sweep_values for s in self.seeds),
                      key=lambda cell: (cell[0], cell[1], cell[2]))

    def scenario_for(self, algorithm: str, value: Any, seed: int) -> Scenario:
        cast = float if self.sweep_key == 'rate' else int
        return self.base.replace(algorithm=algorithm, seed=seed, **{self.sweep_key: cast(value)})


def load_matrix(path: Union[str, Path]) -> ExperimentMatrix:
    """
    YAML matrix file. ``base`` is either a scenario path (relative to the matrix
    file) or an inline mapping of scenario keys.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError("matrix file not found", path)
    try:
        with open(path, 'r', encoding='utf8') as fh:
            data = yaml.safe_load(fh) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed YAML: {exc}", path) from exc
    if not isinstance(data, dict):
        raise ConfigError("matrix file must hold a mapping", path)

    unknown = set(data) - {'base', 'sweep_key', 'sweep_values', 'algorithms', 'seeds', 'workers'}
    if unknown:
        raise ConfigError(f"unknown matrix key(s) {sorted(unknown)}", path)

    base = data.get('base') or {}
    if isinstance(base, str):
        base_scenario = parse_scenario(path.parent / base)
    elif isinstance(base, dict):
        text = ''.join(f"{k} = {v}\n" for k, v in base.items())
        base_scenario = parse_scenario_text(text, path)
    else:
        raise ConfigError("'base' must be a scenario path or a mapping", path)

    seeds = data.get('seeds', 10)
    if isinstance(seeds, int):
        seeds = list(range(seeds))
    try:
        return ExperimentMatrix(
            base=base_scenario,
            sweep_key=data.get('sweep_key', ''),
            sweep_values=tuple(data.get('sweep_values') or ()),
            algorithms=tuple(data.get('algorithms') or ALGORITHMS),
            seeds=tuple(int(s) for s in seeds),
            workers=int(data.get('workers', 1)),
        )
    except ConfigError as exc:
        raise ConfigError(str(exc), path) from exc
