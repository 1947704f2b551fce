import json
import logging
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor

import pandas as pd
from tqdm import tqdm

logger = logging.getLogger(__name__)

# largest number of qubits (graph nodes) simulated or enumerated without force
MAX_QUBITS = 26
GENERATOR_VERSION = 1
FILE_VERSION = 1


class InvalidParametersError(ValueError):
    """Raised when the parameters of an operation violate its preconditions."""


class GenerationExhaustedError(RuntimeError):
    """Raised when random graph generation exceeds its retry budget."""


class DimensionMismatchError(ValueError):
    """Raised when the sizes of a state, diagonal or assignment do not agree."""


class SizeLimitError(ValueError):
    """Raised when a problem exceeds the configured qubit limit."""


class MalformedInputError(ValueError):
    """
    Raised when a file or text cannot be parsed.

    Parameters
    ----------
    msg : str
        Description of the problem.
    line : int, optional
        The line number (1-based) of the problem, when known. The default is None.
    position : int or str, optional
        The column (1-based) or another location hint, such as the index of an edge.
        The default is None.
    """

    def __init__(self, msg, line=None, position=None):
        self.line = line
        self.position = position
        if line is not None:
            msg = f"{msg} (line {line}, position {position})"
        elif position is not None:
            msg = f"{msg} (at {position})"
        super().__init__(msg)


class NonFiniteError(FloatingPointError):
    """Raised when an expectation value or feedback parameter is NaN or infinite."""


class DivergedStateError(FloatingPointError):
    """Raised when the norm of a simulated state drifts away from 1."""


class BaselineMismatchError(ValueError):
    """Raised when a baseline does not belong to the graph it is used with."""


class DegenerateInputError(ValueError):
    """Raised when there is not enough (valid) data to compute a result."""


def check_qubit_limit(n, max_qubits=None):
    """Raise a SizeLimitError when n exceeds max_qubits (default MAX_QUBITS)."""
    if max_qubits is None:
        max_qubits = MAX_QUBITS
    if n > max_qubits:
        raise SizeLimitError(
            f"{n} qubits exceeds the limit of {max_qubits}; use force to override"
        )


def _format_repr(self, props):
    # format these properties into a string
    props_str = ", ".join(f"{key}={value!r}" for key, value in props.items())
    return f"{self.__class__.__name__}({props_str})"


def write_text(fname, text):
    """
    Write text to a file atomically.

    The text is first written to a temporary file in the same directory, which then
    replaces fname, so readers never see a partially written file.

    Parameters
    ----------
    fname : str
        The path of the file to write. Missing parent directories are created.
    text : str
        The contents of the file.
    """
    dirname = os.path.dirname(os.path.abspath(fname))
    os.makedirs(dirname, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=dirname, prefix=".tmp_", suffix=".part")
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(text)
        os.replace(tmp, fname)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


def write_json(fname, data):
    write_text(fname, json.dumps(data, indent=2) + "\n")


def write_csv(fname, df):
    write_text(fname, df.to_csv(index=False, lineterminator="\n"))


def loads_json(text, source="<text>"):
    """Parse JSON text, turning syntax errors into a MalformedInputError."""
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise MalformedInputError(f"Invalid JSON in {source}: {e.msg}", e.lineno, e.colno)


def _as_int(value, name, source):
    if isinstance(value, bool) or not isinstance(value, int):
        raise MalformedInputError(f"{name} must be an integer in {source}", position=name)
    return value


def read_json(fname):
    try:
        with open(fname) as f:
            text = f.read()
    except OSError as e:
        raise OSError(f"Cannot read {fname}: {e.strerror}") from e
    return loads_json(text, source=fname)


def parallel_map(func, items, jobs=1, silent=False, desc=None):
    """
    Apply func to every item, optionally in parallel processes.

    Results are returned in the order of items, independent of the number of jobs.

    Parameters
    ----------
    func : callable
        A picklable function taking one item.
    items : list
        The items to process.
    jobs : int, optional
        The maximum number of worker processes. When jobs is 1, all items are
        processed in the current process. The default is 1.
    silent : bool, optional
        Do not show a progress bar when silent is True. The default is False.
    desc : str, optional
        The description of the progress bar. The default is None.

    Returns
    -------
    list
        The results of func, in the order of items.
    """
    items = list(items)
    if jobs is None or jobs <= 1 or len(items) <= 1:
        return [func(item) for item in tqdm(items, disable=silent, desc=desc)]
    with ProcessPoolExecutor(max_workers=jobs) as executor:
        results = executor.map(func, items)
        return list(tqdm(results, total=len(items), disable=silent, desc=desc))


def read_artifacts(fnames):
    """
    Read a set of artifact files, dispatching on their file name.

    Parameters
    ----------
    fnames : list of str
        Paths to graph (``.json``), baseline (``.baseline.json``), schedule
        (``.schedule.json``), scan (``.scan.json``), summary or fit JSON files and CSV
        files.

    Returns
    -------
    dict
        A dictionary with one sub-dictionary per kind of artifact, mapping the file
        name to the parsed object.
    """
    data = {}
    for fname in fnames:
        base = os.path.basename(fname)
        if base.endswith(".baseline.json"):
            from .graph import parse_baseline

            kind, read = "baseline", parse_baseline
        elif base.endswith(".schedule.json"):
            from .engine import parse_schedule

            kind, read = "schedule", parse_schedule
        elif base.endswith(".scan.json"):
            from .experiment import parse_scan

            kind, read = "scan", parse_scan
        elif base == "manifest.json" or base.endswith("summary.json"):
            kind, read = "json", None
        elif base == "fit.json":
            from .experiment import parse_fit

            kind, read = "fit", parse_fit
        elif base.endswith(".json"):
            from .graph import parse_graph

            kind, read = "graph", parse_graph
        elif base.endswith(".csv"):
            kind, read = "csv", None
        else:
            logger.warning(f"File {fname} not supported")
            continue
        logger.debug(f"Reading {kind} from {fname}")
        if kind == "csv":
            try:
                data.setdefault(kind, {})[fname] = pd.read_csv(fname)
            except pd.errors.ParserError as e:
                raise MalformedInputError(f"Invalid CSV in {fname}: {e}")
            continue
        if read is None:
            data.setdefault(kind, {})[fname] = read_json(fname)
            continue
        try:
            with open(fname) as f:
                text = f.read()
        except OSError as e:
            raise OSError(f"Cannot read {fname}: {e.strerror}") from e
        data.setdefault(kind, {})[fname] = read(text, source=fname)
    return data

