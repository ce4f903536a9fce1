"""Client side of the external-solver bridge.

Spawns a solver subprocess and speaks protocol v1: one JSON object per line
over the child's stdin/stdout.  Requests carry strictly increasing ids and
at most one request is in flight per session.  Vectors and operators stay
inside the solver process and are exposed here as first-class vector
array / operator / model implementations holding integer handles; no
message ever carries a payload proportional to the solver dimension
(except explicit `dofs` extraction of the requested entries).

Floats survive the JSON round trip exactly: Python serializes them via
`repr`, the shortest decimal that round-trips 64-bit floats.
"""

from __future__ import annotations

import json
import queue
import subprocess
import threading

import numpy as np

from .models import Model
from .operators import LincombOperator, Operator
from .parameters import ParameterSpace, functional_from_dict
from .vectorarrays import VectorArray

__all__ = ['Session', 'SessionError', 'RemoteError', 'RemoteVectorArray',
           'RemoteMatrixOperator', 'RemoteModel', 'spawn_remote_model',
           'PROTOCOL_VERSION']

PROTOCOL_VERSION = 1


class SessionError(Exception):
    """Transport-level failure: handshake, timeout, crash, malformed data."""


class RemoteError(Exception):
    """Error reported by the server (protocol error object)."""

    def __init__(self, code, msg):
        self.code = code
        self.msg = msg
        super().__init__(f'{code}: {msg}')


class Session:
    """One child process, one serialized JSON-line command stream."""

    def __init__(self, command, timeout=30.0):
        self.timeout = timeout
        self._next_id = 0
        self._lock = threading.Lock()
        self._closed = False
        # (direction, op, byte count) per message, for transfer-size guards
        self.message_log = []
        try:
            self._proc = subprocess.Popen(
                command, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                text=True, bufsize=1)
        except OSError as e:
            raise SessionError(f'failed to spawn {command!r}: {e}') from e
        self._responses = queue.Queue()
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()

    def _read_loop(self):
        try:
            for line in self._proc.stdout:
                self._responses.put(line)
        except ValueError:
            pass
        self._responses.put(None)  # EOF marker

    def call(self, op, timeout=None, **args):
        """Synchronous request; returns the result field or raises."""
        with self._lock:
            if self._closed:
                raise SessionError('session closed')
            self._next_id += 1
            request_id = self._next_id
            line = json.dumps({'id': request_id, 'op': op, 'args': args}) + '\n'
            self.message_log.append(('send', op, len(line)))
            try:
                self._proc.stdin.write(line)
                self._proc.stdin.flush()
            except (BrokenPipeError, OSError) as e:
                raise SessionError(f'server pipe broken during {op!r}: {e}') from e
            try:
                raw = self._responses.get(timeout=timeout or self.timeout)
            except queue.Empty:
                raise SessionError(f'timeout waiting for response to {op!r}')
            if raw is None:
                raise SessionError(f'server closed the connection during {op!r}')
            self.message_log.append(('recv', op, len(raw)))
            try:
                response = json.loads(raw)
            except json.JSONDecodeError as e:
                raise SessionError(f'malformed response line: {e}') from e
            if response.get('id') != request_id:
                raise SessionError(f'response id {response.get("id")} does not '
                                   f'match request id {request_id}')
            if response.get('ok'):
                return response.get('result')
            error = response.get('error') or {}
            raise RemoteError(error.get('code', 'UNKNOWN'), error.get('msg', ''))

    def free(self, object_id):
        if self._closed or self._proc.poll() is not None:
            return
        try:
            self.call('free', id=object_id)
        except (SessionError, RemoteError):
            pass

    def close(self):
        if self._closed:
            return
        try:
            self.call('shutdown', timeout=5.0)
        except (SessionError, RemoteError):
            pass
        self._closed = True
        try:
            self._proc.stdin.close()
        except OSError:
            pass
        self._proc.wait(timeout=5)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def _mu_payload(mu):
    return None if mu is None else mu.to_dict()


class RemoteVectorArray(VectorArray):
    """Vector array living inside the solver process, addressed by handle."""

    def __init__(self, session, object_id, dim, length, owned=True):
        self.session = session
        self.object_id = object_id
        self._dim = int(dim)
        self._len = int(length)
        # non-owning wrappers (e.g. around the model rhs handle) never free
        self._freed = not owned

    @property
    def dim(self):
        return self._dim

    def __len__(self):
        return self._len

    def _wrap(self, result_id, length):
        return RemoteVectorArray(self.session, result_id, self._dim, length)

    def copy(self, indices=None):
        args = {'array_id': self.object_id}
        if indices is not None:
            args['indices'] = [int(i) for i in indices]
        result = self.session.call('copy', **args)
        length = len(indices) if indices is not None else self._len
        return self._wrap(result, length)

    def append(self, other):
        if not isinstance(other, RemoteVectorArray):
            raise ValueError('can only append remote arrays to remote arrays')
        self.session.call('append', array_id=self.object_id, other_id=other.object_id)
        self._len += len(other)

    def scal(self, alpha):
        # a * x == x + (a - 1) * x, so scaling rides on axpy
        alpha = np.asarray(alpha, dtype=float)
        shifted = (alpha - 1.0).tolist()
        self.session.call('axpy', array_id=self.object_id, alpha=shifted,
                          x_id=self.object_id)

    def axpy(self, alpha, x):
        alpha = self._check_axpy(alpha, x)
        self.session.call('axpy', array_id=self.object_id, alpha=alpha.tolist(),
                          x_id=x.object_id)

    def lincomb(self, coefficients):
        coefficients = np.atleast_2d(np.asarray(coefficients, dtype=float))
        if coefficients.shape[1] != self._len:
            raise ValueError('coefficient matrix has wrong number of columns')
        result = self.session.call('lincomb', array_id=self.object_id,
                                   coefficients=coefficients.tolist())
        return self._wrap(result, coefficients.shape[0])

    def inner(self, other):
        result = self.session.call('inner', a=self.object_id, b=other.object_id)
        return np.asarray(result, dtype=float).reshape(self._len, len(other))

    def dofs(self, indices):
        indices = [int(i) for i in indices]
        result = self.session.call('dofs', array_id=self.object_id, indices=indices)
        return np.asarray(result, dtype=float).reshape(self._len, len(indices))

    def __del__(self):
        if not getattr(self, '_freed', True):
            self.session.free(self.object_id)

    def free(self):
        if not self._freed:
            self.session.free(self.object_id)
            self._freed = True


class RemoteMatrixOperator(Operator):
    """Operator handle inside the solver process."""

    def __init__(self, session, object_id, source_dim, range_dim):
        self.session = session
        self.object_id = object_id
        self.source_dim = int(source_dim)
        self.range_dim = int(range_dim)

    def apply(self, U, mu=None):
        self._check_apply(U)
        result = self.session.call('apply', op_id=self.object_id,
                                   array_id=U.object_id, mu=_mu_payload(mu))
        return RemoteVectorArray(self.session, result, self.range_dim, len(U))

    def apply_inverse(self, V, mu=None, solver_options=None):
        result = self.session.call('apply_inverse', op_id=self.object_id,
                                   array_id=V.object_id, mu=_mu_payload(mu))
        return RemoteVectorArray(self.session, result, self.source_dim, len(V))


class RemoteModel(Model):
    """Stationary model whose high-dimensional data lives in the server."""

    def __init__(self, session, info):
        self.session = session
        self.dim = int(info['dim'])
        op_info = info['operator']
        if op_info.get('kind') != 'lincomb':
            raise SessionError('expected an affinely decomposed remote operator')
        leaves = [RemoteMatrixOperator(session, oid, self.dim, self.dim)
                  for oid in op_info['operators']]
        thetas = [functional_from_dict(d) for d in op_info['coefficients']]
        self.operator = LincombOperator(leaves, thetas)
        self._rhs_id = info['rhs']
        self.products = {name: RemoteMatrixOperator(session, oid, self.dim, self.dim)
                         for name, oid in info.get('products', {}).items()}
        self.parameter_space = ParameterSpace.from_dict(info['parameter_space'])

    def rhs_vector(self, mu=None):
        rhs = RemoteVectorArray(self.session, self._rhs_id, self.dim, 1, owned=False)
        return rhs.copy()

    def empty_array(self):
        rhs = RemoteVectorArray(self.session, self._rhs_id, self.dim, 1, owned=False)
        return rhs.copy(indices=[])

    def solve(self, mu=None):
        result = self.session.call('solve', mu=_mu_payload(mu))
        return RemoteVectorArray(self.session, result, self.dim, 1)


def spawn_remote_model(command, timeout=30.0):
    """Spawn a protocol-v1 solver server and wrap its model.

    Returns `(model, session)`.  The handshake checks the protocol version;
    a mismatch or missing reply raises `SessionError`.
    """
    session = Session(command, timeout=timeout)
    try:
        hello = session.call('hello', timeout=timeout, version=PROTOCOL_VERSION)
        if hello.get('version') != PROTOCOL_VERSION:
            raise SessionError(f'protocol version mismatch: {hello.get("version")}')
        info = session.call('model_info')
    except (SessionError, RemoteError):
        try:
            session._closed = True
            session._proc.kill()
        except OSError:
            pass
        raise
    return RemoteModel(session, info), session
