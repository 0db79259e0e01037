"""Monochromatic embeddings of bounded-degree graphs in sparse random multipartite hosts.

Submodules: graphcore (hosts, colorings, file formats), properties (sampled
property checks), regularity (partitions and reduced graphs), hprep (target
preparation), embedder (level-by-level embedding), oracles (exhaustive ground
truth), constants (parameter schedules), experiment and cli (harness).
"""

__version__ = "0.1.0"
