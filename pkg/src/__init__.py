# P2 Signature Simulator