"""Shared fixtures: live server subprocesses and the attack CLI runner."""
import contextlib
import json
import shutil
import socket
import subprocess
import time

import httpx
import pytest


def free_port() -> int:
    with contextlib.closing(socket.socket()) as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


class ServerHandle:
    def __init__(self, proc: subprocess.Popen, url: str):
        self.proc = proc
        self.url = url

    def post(self, body: dict) -> httpx.Response:
        return httpx.post(self.url + "/score", json=body, timeout=10.0)


@contextlib.contextmanager
def running_server(probe: dict, *args: str):
    """Starts `morpheus-server` with the given flags and waits until the
    probe request answers 200."""
    port = free_port()
    proc = subprocess.Popen(
        ["morpheus-server", "--port", str(port), *args],
        stdout=subprocess.DEVNULL, stderr=subprocess.PIPE, text=True)
    url = f"http://127.0.0.1:{port}"
    handle = ServerHandle(proc, url)
    try:
        deadline = time.monotonic() + 20.0
        while True:
            if proc.poll() is not None:
                raise RuntimeError(
                    f"server exited early: {proc.stderr.read()}")
            try:
                if handle.post(probe).status_code == 200:
                    break
            except httpx.TransportError:
                pass
            if time.monotonic() > deadline:
                raise RuntimeError("server did not become ready")
            time.sleep(0.1)
        yield handle
    finally:
        proc.terminate()
        try:
            proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            proc.kill()
            proc.wait()


GENERIC_PROBE = {"task": "generic", "candidates": ["ping"]}
QA_PROBE = {"task": "qa", "candidates": ["ping"], "passage": "ping pong",
            "gold_answers": ["pong"]}
MT_PROBE = {"task": "mt", "candidates": ["ping"], "reference": "ping"}


@pytest.fixture(scope="session")
def echo_server():
    with running_server(GENERIC_PROBE, "--model", "echo") as handle:
        yield handle


@pytest.fixture(scope="session")
def qa_server():
    with running_server(QA_PROBE, "--model", "lexical-qa") as handle:
        yield handle


@pytest.fixture(scope="session")
def attack_cli():
    """Path of the attack toolkit's CLI; the integration tests drive the
    toolkit strictly through it."""
    path = shutil.which("morpheus")
    assert path, "attack CLI not on PATH"
    return path


def run_cli(cli: str, *args: str) -> subprocess.CompletedProcess:
    return subprocess.run([cli, *args], capture_output=True, text=True,
                          timeout=300)


def write_jsonl(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")


def read_jsonl(path):
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]
