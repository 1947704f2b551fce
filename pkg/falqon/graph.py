import hashlib
import json
import logging
from dataclasses import dataclass

import networkx as nx
import numpy as np

from .util import (
    FILE_VERSION,
    GENERATOR_VERSION,
    BaselineMismatchError,
    DimensionMismatchError,
    GenerationExhaustedError,
    InvalidParametersError,
    MalformedInputError,
    _as_int,
    _format_repr,
    check_qubit_limit,
    loads_json,
)

logger = logging.getLogger(__name__)

# number of basis states handled at once when enumerating cuts
_CHUNK_SIZE = 2**20


def _is_connected(node_count, edges):
    graph = nx.empty_graph(node_count)
    graph.add_edges_from(edges)
    return nx.is_connected(graph)


def _graph_id(node_count, degree, seed, edges):
    if seed is None:
        key = f"edges:{node_count}:{list(edges)}"
    else:
        key = f"regular:{node_count}:{degree}:{seed}:{GENERATOR_VERSION}"
        # generate_regular only returns a disconnected graph when asked to allow one
        if not _is_connected(node_count, edges):
            key += ":disconnected"
    return hashlib.sha256(key.encode()).hexdigest()[:16]


class Graph:
    """
    An undirected simple graph, the instance of a Max-Cut problem.

    A Graph is immutable after construction. Vertex i corresponds to qubit i, which is
    bit i (least-significant bit first) of a basis-state index.

    Parameters
    ----------
    node_count : int
        The number of vertices n.
    edges : iterable of tuple of int
        The edges as vertex pairs. Pairs are normalised to (i, j) with i < j and sorted
        lexicographically.
    degree : int, optional
        The degree the graph was generated with. The default is None.
    seed : int, optional
        The seed the graph was generated with. When seed is None, the id of the graph
        is derived from its edges. The default is None.
    """

    def __init__(self, node_count, edges, degree=None, seed=None):
        node_count = int(node_count)
        if node_count < 1:
            raise InvalidParametersError(f"node_count must be positive, not {node_count}")
        normalised = set()
        for i, j in edges:
            i, j = int(i), int(j)
            if i == j:
                raise InvalidParametersError(f"Self-loop on vertex {i}")
            if not (0 <= i < node_count and 0 <= j < node_count):
                raise InvalidParametersError(
                    f"Edge ({i}, {j}) has an endpoint outside 0..{node_count - 1}"
                )
            edge = (min(i, j), max(i, j))
            if edge in normalised:
                raise InvalidParametersError(f"Duplicate edge {edge}")
            normalised.add(edge)
        self.node_count = node_count
        self.edges = tuple(sorted(normalised))
        self.degree = None if degree is None else int(degree)
        self.seed = None if seed is None else int(seed)
        self.id = _graph_id(node_count, self.degree, self.seed, self.edges)
        edge_array = np.array(self.edges, dtype=np.int64).reshape(-1, 2)
        edge_array.flags.writeable = False
        self._edge_array = edge_array

    def __repr__(self):
        props = {"id": self.id, "node_count": self.node_count, "edges": len(self.edges)}
        return _format_repr(self, props)

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.node_count == other.node_count
            and self.edges == other.edges
            and self.degree == other.degree
            and self.seed == other.seed
        )

    def __hash__(self):
        return hash((self.node_count, self.edges, self.degree, self.seed))

    @property
    def edge_array(self):
        """The edges as a read-only integer array of shape (m, 2)."""
        return self._edge_array

    def degrees(self):
        return np.bincount(self._edge_array.ravel(), minlength=self.node_count)

    def to_networkx(self):
        graph = nx.Graph()
        graph.add_nodes_from(range(self.node_count))
        graph.add_edges_from(self.edges)
        return graph

    @classmethod
    def from_networkx(cls, graph, **kwargs):
        """Create a Graph from a networkx graph with nodes labelled 0..n-1."""
        return cls(graph.number_of_nodes(), graph.edges(), **kwargs)

    def to_dict(self):
        return {
            "version": FILE_VERSION,
            "n": self.node_count,
            "degree": self.degree,
            "seed": None if self.seed is None else str(self.seed),
            "edges": [[i, j] for i, j in self.edges],
        }


def generate_regular(n, degree, seed, connected=True, max_restarts=10_000):
    """
    Generate a random degree-regular graph with the pairing (configuration) model.

    All n * degree vertex stubs are paired uniformly at random. Pairings containing a
    self-loop or a duplicate edge are rejected as a whole and drawn again. When
    connected is True, disconnected outcomes are rejected as well. Every attempt uses
    its own random stream, derived from (seed, attempt), so the result only depends on
    (n, degree, seed).

    Parameters
    ----------
    n : int
        The number of vertices.
    degree : int
        The degree of every vertex.
    seed : int
        A non-negative (64-bit) seed.
    connected : bool, optional
        Only return connected graphs. The default is True.
    max_restarts : int, optional
        The number of attempts before giving up. The default is 10,000.

    Returns
    -------
    Graph
        The generated graph.

    Raises
    ------
    InvalidParametersError
        If degree < 1, degree >= n, n * degree is odd or seed is negative.
    GenerationExhaustedError
        If no valid graph was drawn within max_restarts attempts.
    """
    n, degree, seed = int(n), int(degree), int(seed)
    if degree < 1 or degree >= n:
        raise InvalidParametersError(f"degree must be in 1..{n - 1}, not {degree}")
    if (n * degree) % 2:
        raise InvalidParametersError(f"n * degree must be even, not {n} * {degree}")
    if seed < 0:
        raise InvalidParametersError(f"seed must be non-negative, not {seed}")

    stubs = np.repeat(np.arange(n), degree)
    for attempt in range(max_restarts):
        rng = np.random.default_rng([seed, attempt])
        pairs = rng.permutation(stubs).reshape(-1, 2)
        low = pairs.min(axis=1)
        high = pairs.max(axis=1)
        if np.any(low == high):
            continue
        if len(np.unique(low * n + high)) < len(low):
            continue
        graph = Graph(n, zip(low.tolist(), high.tolist()), degree=degree, seed=seed)
        if connected and not nx.is_connected(graph.to_networkx()):
            logger.debug(f"Attempt {attempt} for n={n}, seed={seed} is disconnected")
            continue
        if attempt > 0:
            logger.debug(f"Generated graph n={n}, seed={seed} after {attempt + 1} attempts")
        return graph
    raise GenerationExhaustedError(
        f"No simple {degree}-regular graph with {n} vertices found in "
        f"{max_restarts} attempts (seed={seed})"
    )


def cut_value(g, x):
    """
    Count the edges of g that cross the partition x.

    Parameters
    ----------
    g : Graph
        The graph.
    x : sequence of int
        The partition label (0 or 1) of every vertex.

    Returns
    -------
    int
        The number of edges (i, j) with x[i] != x[j].
    """
    x = np.asarray(x)
    if x.shape != (g.node_count,):
        raise DimensionMismatchError(
            f"Assignment has length {x.size}, graph has {g.node_count} vertices"
        )
    edges = g.edge_array
    return int(np.count_nonzero(x[edges[:, 0]] != x[edges[:, 1]]))


def bits_of_index(index, n):
    """Return the assignment encoded by a basis-state index (bit i is vertex i)."""
    return tuple((int(index) >> i) & 1 for i in range(n))


def _cut_counts(edges, start, stop):
    # number of cut edges for every basis-state index in range(start, stop)
    indices = np.arange(start, stop, dtype=np.int64)
    counts = np.zeros(stop - start, dtype=np.int64)
    for i, j in edges:
        counts += ((indices >> i) ^ (indices >> j)) & 1
    return counts


class CostDiagonal:
    """
    The diagonal of the cost Hamiltonian of a graph.

    ``energies[x]`` is the energy of basis state x, which equals minus the number of
    edges cut by the assignment encoded in x. Energies are stored as exact integers;
    ``as_float`` converts them for simulation.

    Parameters
    ----------
    n : int
        The number of qubits.
    energies : np.ndarray
        The 2**n integer energies.
    graph_id : str, optional
        The id of the source graph. The default is None.
    edge_count : int, optional
        The number of edges of the source graph. The default is None.
    """

    def __init__(self, n, energies, graph_id=None, edge_count=None):
        energies = np.asarray(energies, dtype=np.int64)
        if energies.shape != (2**n,):
            raise DimensionMismatchError(
                f"Expected {2**n} energies for {n} qubits, got {energies.size}"
            )
        energies.flags.writeable = False
        self.n = int(n)
        self.energies = energies
        self.graph_id = graph_id
        self.edge_count = edge_count
        self._float = None

    def __repr__(self):
        return _format_repr(self, {"graph_id": self.graph_id, "n": self.n})

    def as_float(self):
        if self._float is None:
            values = self.energies.astype(np.float64)
            values.flags.writeable = False
            self._float = values
        return self._float

    @property
    def max_cut(self):
        return int(-self.energies.min())


def build_cost_diagonal(g, max_qubits=None):
    """
    Build the energy table of the Max-Cut cost Hamiltonian of a graph.

    The cost Hamiltonian is -1/2 * sum over edges (1 - Z_i Z_j), so every basis state
    has as energy minus the number of edges it cuts.

    Parameters
    ----------
    g : Graph
        The graph.
    max_qubits : int, optional
        The qubit limit. The default is None, which uses util.MAX_QUBITS.

    Returns
    -------
    CostDiagonal
        The 2**n integer energies.
    """
    n = g.node_count
    check_qubit_limit(n, max_qubits)
    size = 2**n
    energies = np.empty(size, dtype=np.int64)
    for start in range(0, size, _CHUNK_SIZE):
        stop = min(start + _CHUNK_SIZE, size)
        energies[start:stop] = -_cut_counts(g.edges, start, stop)
    return CostDiagonal(n, energies, graph_id=g.id, edge_count=len(g.edges))


class BaselineRecord:
    """
    The maximum cut of a graph, found by exhaustive search or simulated annealing.

    Parameters
    ----------
    graph_id : str
        The id of the graph.
    max_cut : int
        The best cut value found.
    method : str
        Either "exhaustive" or "annealing".
    witness : sequence of int
        An assignment attaining max_cut.
    """

    methods = ("exhaustive", "annealing")

    def __init__(self, graph_id, max_cut, method, witness):
        if method not in self.methods:
            raise InvalidParametersError(f"Unknown baseline method: {method}")
        max_cut = int(max_cut)
        if max_cut < 0:
            raise InvalidParametersError(f"max_cut must be non-negative, not {max_cut}")
        self.graph_id = graph_id
        self.max_cut = max_cut
        self.method = method
        self.witness = tuple(int(b) for b in witness)

    def __repr__(self):
        props = {"graph_id": self.graph_id, "max_cut": self.max_cut, "method": self.method}
        return _format_repr(self, props)

    @property
    def ground_energy(self):
        return -self.max_cut

    def check(self, g):
        """Raise a BaselineMismatchError when this record does not describe g."""
        if self.graph_id != g.id:
            raise BaselineMismatchError(
                f"Baseline of graph {self.graph_id} used with graph {g.id}"
            )
        if cut_value(g, self.witness) != self.max_cut:
            raise BaselineMismatchError(
                f"Witness of baseline {self.graph_id} does not attain {self.max_cut}"
            )

    def to_dict(self):
        return {
            "graph_id": self.graph_id,
            "max_cut": self.max_cut,
            "ground_energy": self.ground_energy,
            "method": self.method,
            "witness": "".join(str(b) for b in self.witness),
        }


def brute_force_max_cut(g, max_qubits=None):
    """
    Find the maximum cut of a graph by exhaustive enumeration.

    Vertex n-1 is fixed to partition 0, since an assignment and its complement cut the
    same edges, so 2**(n-1) assignments are enumerated.

    Parameters
    ----------
    g : Graph
        The graph.
    max_qubits : int, optional
        The size limit. The default is None, which uses util.MAX_QUBITS.

    Returns
    -------
    BaselineRecord
        The exact maximum cut, with the lowest-index assignment attaining it.
    """
    n = g.node_count
    check_qubit_limit(n, max_qubits)
    size = 2 ** (n - 1)
    best_value, best_index = -1, 0
    for start in range(0, size, _CHUNK_SIZE):
        stop = min(start + _CHUNK_SIZE, size)
        counts = _cut_counts(g.edges, start, stop)
        k = int(np.argmax(counts))
        if counts[k] > best_value:
            best_value, best_index = int(counts[k]), start + k
    return BaselineRecord(g.id, best_value, "exhaustive", bits_of_index(best_index, n))


@dataclass(frozen=True)
class AnnealParams:
    """
    Parameters of the simulated-annealing Max-Cut solver.

    Every restart performs ``sweeps_per_node * n`` sweeps of n single-vertex flip
    proposals, accepted with the Metropolis rule, while the temperature decreases
    geometrically from t_start to t_end.
    """

    restarts: int = 32
    sweeps_per_node: int = 200
    t_start: float = 2.0
    t_end: float = 0.01

    def validate(self):
        if not (self.t_start > 0 and self.t_end > 0):
            raise InvalidParametersError("Annealing temperatures must be positive")
        if not self.t_start > self.t_end:
            raise InvalidParametersError("t_start must be larger than t_end")
        if self.restarts < 1:
            raise InvalidParametersError("restarts must be at least 1")
        if self.sweeps_per_node < 1:
            raise InvalidParametersError("sweeps_per_node must be at least 1")


def anneal_max_cut(g, params=None, seed=0):
    """
    Find a large cut of a graph with simulated annealing.

    All restarts run side by side on one random stream, so the result is deterministic
    for a fixed seed. The best cut seen during any restart is returned.

    Parameters
    ----------
    g : Graph
        The graph.
    params : AnnealParams, optional
        The annealing parameters. The default is None, which uses AnnealParams().
    seed : int, optional
        The seed of the random stream. The default is 0.

    Returns
    -------
    BaselineRecord
        The best cut found, with method "annealing".
    """
    if params is None:
        params = AnnealParams()
    params.validate()
    n = g.node_count
    edges = g.edge_array
    rng = np.random.default_rng(int(seed))
    restarts = params.restarts

    adjacency = np.zeros((n, n), dtype=np.int64)
    adjacency[edges[:, 0], edges[:, 1]] = 1
    adjacency[edges[:, 1], edges[:, 0]] = 1

    spins = rng.choice(np.array([-1, 1]), size=(restarts, n))
    cut = (spins[:, edges[:, 0]] != spins[:, edges[:, 1]]).sum(axis=1)
    best_cut = cut.copy()
    best_spins = spins.copy()

    steps = params.sweeps_per_node * n * n
    if len(edges) > 0 and steps > 0:
        ratio = params.t_end / params.t_start
        temperatures = params.t_start * ratio ** (np.arange(steps) / max(steps - 1, 1))
        rows = np.arange(restarts)
        for temperature in temperatures:
            vertex = rng.integers(n, size=restarts)
            delta = spins[rows, vertex] * (adjacency[vertex] * spins).sum(axis=1)
            uniform = rng.random(restarts)
            accept = (delta >= 0) | (uniform < np.exp(np.minimum(delta, 0) / temperature))
            spins[rows[accept], vertex[accept]] *= -1
            cut += np.where(accept, delta, 0)
            improved = cut > best_cut
            if improved.any():
                best_cut[improved] = cut[improved]
                best_spins[improved] = spins[improved]

    k = int(np.argmax(best_cut))
    witness = (1 - best_spins[k]) // 2
    return BaselineRecord(g.id, int(best_cut[k]), "annealing", witness)


def serialize_graph(g):
    """Serialize a graph to the JSON graph-file format."""
    return json.dumps(g.to_dict(), indent=2) + "\n"


def parse_graph(text, source="<text>"):
    """
    Parse a graph from the JSON graph-file format.

    Parameters
    ----------
    text : str
        The contents of a graph file.
    source : str, optional
        A name for the text, used in error messages. The default is "<text>".

    Returns
    -------
    Graph
        The parsed graph.

    Raises
    ------
    MalformedInputError
        If the text is not valid JSON, misses fields, or describes a graph with
        self-loops, duplicate edges, out-of-range endpoints or a degree that does not
        match the declared degree.
    """
    data = loads_json(text, source)
    if not isinstance(data, dict):
        raise MalformedInputError(f"Graph file {source} must contain a JSON object")
    for key in ["version", "n", "edges"]:
        if key not in data:
            raise MalformedInputError(f"Missing key '{key}' in {source}", position=key)
    if data["version"] != FILE_VERSION:
        raise MalformedInputError(f"Unsupported version {data['version']} in {source}")
    n = _as_int(data["n"], "n", source)
    if n < 1:
        raise MalformedInputError(f"n must be positive in {source}", position="n")
    degree = data.get("degree")
    if degree is not None:
        degree = _as_int(degree, "degree", source)
    seed = data.get("seed")
    if seed is not None:
        try:
            seed = int(seed)
        except (TypeError, ValueError):
            raise MalformedInputError(f"seed must be an integer string in {source}")
    if not isinstance(data["edges"], list):
        raise MalformedInputError(f"edges must be a list in {source}", position="edges")

    edges = []
    seen = set()
    for k, edge in enumerate(data["edges"]):
        position = f"edge {k}"
        if not isinstance(edge, list) or len(edge) != 2:
            raise MalformedInputError(f"Edge must be a pair in {source}", position=position)
        i, j = (_as_int(v, position, source) for v in edge)
        if i == j:
            raise MalformedInputError(
                f"Self-loop ({i}, {j}) in {source}", position=position
            )
        if not (0 <= i < n and 0 <= j < n):
            raise MalformedInputError(
                f"Edge ({i}, {j}) has an endpoint >= n={n} or < 0 in {source}",
                position=position,
            )
        key = (min(i, j), max(i, j))
        if key in seen:
            raise MalformedInputError(f"Duplicate edge {key} in {source}", position=position)
        seen.add(key)
        edges.append(key)

    g = Graph(n, edges, degree=degree, seed=seed)
    if degree is not None and not np.all(g.degrees() == degree):
        raise MalformedInputError(f"Graph in {source} is not {degree}-regular")
    return g


def serialize_baseline(record):
    return json.dumps(record.to_dict(), indent=2) + "\n"


def parse_baseline(text, source="<text>"):
    """Parse a BaselineRecord from the JSON baseline-file format."""
    data = loads_json(text, source)
    if not isinstance(data, dict):
        raise MalformedInputError(f"Baseline file {source} must contain a JSON object")
    for key in ["graph_id", "max_cut", "ground_energy", "method", "witness"]:
        if key not in data:
            raise MalformedInputError(f"Missing key '{key}' in {source}", position=key)
    max_cut = _as_int(data["max_cut"], "max_cut", source)
    if _as_int(data["ground_energy"], "ground_energy", source) != -max_cut:
        raise MalformedInputError(f"ground_energy is not -max_cut in {source}")
    witness = data["witness"]
    if not isinstance(witness, str) or set(witness) - {"0", "1"}:
        raise MalformedInputError(f"witness must be a bit string in {source}")
    try:
        return BaselineRecord(data["graph_id"], max_cut, data["method"], witness)
    except InvalidParametersError as e:
        raise MalformedInputError(f"{e} in {source}")
