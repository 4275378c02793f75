"""Customized cyclesparse exceptions."""
from typing import Any, Generator, Iterable, List, Optional, Sequence, Union


class InvalidInputValue(Exception):
    """Exception raised for invalid input.

    Parameters
    ----------
    inp : str
        Name of the input parameter
    valid_inputs : tuple
        List of valid inputs
    """

    def __init__(
        self, inp: str, valid_inputs: Union[Iterable[Any], Generator[str, None, None]]
    ) -> None:
        self.message = f"Given {inp} is invalid. Valid {inp}s are:\n" + ", ".join(
            str(i) for i in valid_inputs
        )
        super().__init__(self.message)

    def __str__(self) -> str:
        return self.message


class InvalidInputType(Exception):
    """Exception raised when a function argument type is invalid.

    Parameters
    ----------
    arg : str
        Name of the function argument
    valid_type : str
        The valid type of the argument
    example : str, optional
        An example of a valid form of the argument, defaults to None.
    """

    def __init__(self, arg: str, valid_type: str, example: Optional[str] = None) -> None:
        self.message = f"The {arg} argument should be of type {valid_type}"
        if example is not None:
            self.message += f":\n{example}"
        super().__init__(self.message)

    def __str__(self) -> str:
        return self.message


class InvalidInputRange(ValueError):
    """Exception raised when a function argument is not in the valid range."""


class MissingItems(Exception):
    """Exception raised when a required item is missing.

    Parameters
    ----------
    missing : list
        A list of missing items.
    """

    def __init__(self, missing: List[str]) -> None:
        self.message = "The following items are missing:\n" + f"{', '.join(missing)}"
        super().__init__(self.message)

    def __str__(self) -> str:
        return self.message


class GraphParseError(ValueError):
    """Exception raised when an edge-list document cannot be parsed.

    Parameters
    ----------
    line : int
        One-based line number of the offending line.
    reason : str
        What is wrong with the line.
    """

    def __init__(self, line: int, reason: str) -> None:
        self.line = line
        self.message = f"Line {line}: {reason}"
        super().__init__(self.message)

    def __str__(self) -> str:
        return self.message


class NotEulerianError(ValueError):
    """Exception raised when a directed graph has unbalanced vertices.

    Parameters
    ----------
    vertices : list
        Vertices whose in-degree differs from their out-degree.
    """

    def __init__(self, vertices: Sequence[int]) -> None:
        shown = ", ".join(str(v) for v in list(vertices)[:10])
        more = "" if len(vertices) <= 10 else f" (and {len(vertices) - 10} more)"
        self.message = f"The graph is not Eulerian, unbalanced vertices: {shown}{more}"
        super().__init__(self.message)

    def __str__(self) -> str:
        return self.message


class ComponentMismatchError(ValueError):
    """Exception raised when two operands disagree on connected components."""

    def __init__(self, reason: str) -> None:
        self.message = f"Connected components do not match: {reason}"
        super().__init__(self.message)

    def __str__(self) -> str:
        return self.message


class ConvergenceError(RuntimeError):
    """Exception raised when an iterative solver hits its iteration cap.

    Parameters
    ----------
    iterations : int
        Number of iterations performed.
    residual : float
        Relative residual at the last iterate.
    """

    def __init__(self, iterations: int, residual: float) -> None:
        self.iterations = iterations
        self.residual = residual
        self.message = (
            f"Solver did not converge after {iterations} iterations, "
            + f"relative residual is {residual:.3e}"
        )
        super().__init__(self.message)

    def __str__(self) -> str:
        return self.message


class PreconditionError(ValueError):
    """Exception raised when an operation is called outside its domain.

    Parameters
    ----------
    operation : str
        Name of the operation.
    reason : str
        The violated requirement.
    """

    def __init__(self, operation: str, reason: str) -> None:
        self.message = f"{operation}: {reason}"
        super().__init__(self.message)

    def __str__(self) -> str:
        return self.message


class RetryBudgetExhausted(RuntimeError):
    """Exception raised when a randomized step fails too many times.

    Parameters
    ----------
    found : int
        Best number of objects found in a single attempt.
    required : int
        Number of objects that were required.
    retries : int
        Number of attempts made.
    """

    def __init__(self, found: int, required: int, retries: int) -> None:
        self.found = found
        self.required = required
        self.message = (
            f"Found {found} of the {required} required cycles after {retries} retries. "
            + "Increase the retry budget or the walk length."
        )
        super().__init__(self.message)

    def __str__(self) -> str:
        return self.message


class InternalConsistencyError(RuntimeError):
    """Exception raised when bookkeeping between two stages disagrees."""

    def __init__(self, reason: str) -> None:
        self.message = f"Internal consistency check failed: {reason}"
        super().__init__(self.message)

    def __str__(self) -> str:
        return self.message
