"""Neural guidance for graph-decimation circuit synthesis.

This package never imports the synthesis toolkit: it talks to it
exclusively through the ``graphsynth-bridge/1`` JSON-lines protocol (a
spawned ``graphsynth serve-bridge`` process) and the ``graphsynth``
command line.
"""

BRIDGE_PROTOCOL_VERSION = "graphsynth-bridge/1"
