#!/usr/bin/env node
// Reference adapter: forecasts every horizon as the window's last value.
// Protocol: one JSON request per stdin line, one JSON response per stdout
// line, matched by id. Exits when stdin closes.

const readline = require('node:readline');

const rl = readline.createInterface({ input: process.stdin, terminal: false });

rl.on('line', (line) => {
  const trimmed = line.trim();
  if (!trimmed) return;
  const req = JSON.parse(trimmed);
  const last = req.window[req.window.length - 1];
  const forecasts = {};
  for (const h of req.horizons) {
    forecasts[String(h)] = last;
  }
  process.stdout.write(JSON.stringify({ id: req.id, forecasts }) + '\n');
});
