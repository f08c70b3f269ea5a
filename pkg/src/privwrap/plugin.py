"""External black boxes over a line protocol.

For each query the wrapper writes one line to the plugin's stdin: the queried
subset's element identifiers, sorted and space separated (an empty line for
the empty set). The plugin answers with one line holding a decimal real. The
process stays up across queries and is stopped by closing its stdin.

Every query has a wall-clock limit. A crash, a hang past the limit, or a reply
that is not a number raises PluginFailure.
"""

from __future__ import annotations

import math
import os
import select
import shlex
import subprocess
import time

from privwrap.domain import Dataset, PluginFailure, ValidationError


def format_element(e) -> str:
    """Wire form of an element: multiset elements (v, i) become ``v#i``."""
    if isinstance(e, tuple):
        return "#".join(format_element(p) for p in e)
    text = repr(e) if isinstance(e, float) else str(e)
    if not text or any(ch.isspace() for ch in text):
        raise ValidationError(f"element identifier {text!r} is empty or contains whitespace")
    return text


class PluginEvaluator:
    def __init__(self, command: str | list[str], timeout: float = 5.0):
        self.argv = shlex.split(command) if isinstance(command, str) else list(command)
        if not self.argv:
            raise ValidationError("empty plugin command")
        if not timeout > 0:
            raise ValidationError(f"timeout must be positive, got {timeout}")
        self.timeout = timeout
        self._proc: subprocess.Popen | None = None
        self._buf = b""

    def _start(self) -> subprocess.Popen:
        if self._proc is None:
            try:
                self._proc = subprocess.Popen(
                    self.argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE, stderr=subprocess.DEVNULL
                )
            except OSError as err:
                raise PluginFailure(f"cannot start plugin {self.argv[0]!r}: {err}") from None
        return self._proc

    def _readline(self) -> bytes:
        proc = self._proc
        fd = proc.stdout.fileno()
        deadline = time.monotonic() + self.timeout
        while b"\n" not in self._buf:
            left = deadline - time.monotonic()
            if left <= 0:
                self.close(kill=True)
                raise PluginFailure(f"plugin did not answer within {self.timeout} s")
            ready, _, _ = select.select([fd], [], [], left)
            if not ready:
                continue
            chunk = os.read(fd, 65536)
            if not chunk:
                self.close(kill=True)
                raise PluginFailure("plugin closed its output")
            self._buf += chunk
        line, _, self._buf = self._buf.partition(b"\n")
        return line

    def __call__(self, z: Dataset) -> float:
        proc = self._start()
        line = " ".join(format_element(e) for e in z.elements) + "\n"
        try:
            proc.stdin.write(line.encode())
            proc.stdin.flush()
        except (BrokenPipeError, OSError):
            self.close(kill=True)
            raise PluginFailure("plugin exited before the query was sent") from None
        reply = self._readline().decode(errors="replace").strip()
        try:
            value = float(reply)
        except ValueError:
            self.close(kill=True)
            raise PluginFailure(f"plugin replied with a non-number: {reply!r}") from None
        if math.isnan(value):
            self.close(kill=True)
            raise PluginFailure("plugin replied with NaN")
        return value

    def close(self, kill: bool = False) -> None:
        proc, self._proc = self._proc, None
        self._buf = b""
        if proc is None:
            return
        try:
            if kill:
                proc.kill()
            else:
                proc.stdin.close()
            proc.wait(timeout=self.timeout)
        except (OSError, subprocess.TimeoutExpired):
            proc.kill()
            proc.wait()
        finally:
            for stream in (proc.stdin, proc.stdout):
                try:
                    stream.close()
                except OSError:
                    pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
