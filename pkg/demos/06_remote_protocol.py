"""Talk to the environment server over its wire protocol.

The server speaks newline-delimited JSON on stdio (or TCP); each request
gets exactly one response.  This script spawns the server as a child
process and runs a short scripted session, which is exactly what the
TypeScript client in frontend/ does for external learners.

Run:  python3 demos/06_remote_protocol.py
"""

import json
import subprocess
import sys

server = subprocess.Popen(
    [sys.executable, "-m", "atsclab", "serve", "--stdio", "--scenario", "scenario1"],
    stdin=subprocess.PIPE, stdout=subprocess.PIPE, text=True)


def call(**msg):
    server.stdin.write(json.dumps(msg) + "\n")
    server.stdin.flush()
    return json.loads(server.stdout.readline())


spec = call(type="spec")
print("spec:", spec)

state = call(type="reset", seed=0)
obs = state["observation"]
print(f"reset: {len(obs)} observation values, reward={state['reward']}")

for action in (3, 3, 9):  # lower the split at intersections 1, 1, then 3
    state = call(type="step", action=action)
    print(f"step action={action}: reward {state['reward']:10.1f}, "
          f"splits {state['info']['splits']}")

oops = call(type="step", action=999)
print("out-of-range action ->", oops)

print("close ->", call(type="close"))
server.wait(timeout=10)
