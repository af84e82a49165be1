/**
 * Bridge server for the browser app: serves the static frontend and
 * forwards events to per-session engine child processes. Responses are
 * the engine's own frame text, so the browser and the node transport
 * share one parser.
 */
import { execFile } from "node:child_process";
import { fileURLToPath } from "node:url";
import path from "node:path";

import express from "express";

import { ServeProcess, engineCommand } from "./engine.js";
import { frameToText } from "./protocol.js";

const here = path.dirname(fileURLToPath(import.meta.url));
const root = path.resolve(here, "..");

const app = express();
app.use(express.text({ type: "*/*", limit: "2mb" }));
app.use(express.static(path.join(root, "public")));
app.use("/dist", express.static(path.join(root, "dist")));

const sessions = new Map<string, ServeProcess>();
let nextSession = 1;

app.post("/api/session", async (req, res) => {
  const args: string[] = [];
  const policy = req.query.policy;
  if (typeof policy === "string" && policy) args.push("--policy", policy);
  try {
    const session = await ServeProcess.start(args);
    const id = String(nextSession++);
    sessions.set(id, session);
    res.json({ id });
  } catch (err) {
    res.status(500).send(String(err));
  }
});

function sessionOr404(req: express.Request, res: express.Response): ServeProcess | null {
  const session = sessions.get(String(req.params.id));
  if (!session) {
    res.status(404).send("no such session");
    return null;
  }
  return session;
}

app.post("/api/session/:id/event", async (req, res) => {
  const session = sessionOr404(req, res);
  if (!session) return;
  try {
    const frame = await session.send(String(req.body).trim());
    res.type("text/plain").send(frameToText(frame));
  } catch (err) {
    res.status(500).send(String(err));
  }
});

app.post("/api/session/:id/scene", async (req, res) => {
  const session = sessionOr404(req, res);
  if (!session) return;
  const lines = String(req.body)
    .split("\n")
    .map((l) => l.trim())
    .filter((l) => l.length > 0);
  try {
    const frame = await session.loadScene(lines);
    res.type("text/plain").send(frameToText(frame));
  } catch (err) {
    res.status(500).send(String(err));
  }
});

app.delete("/api/session/:id", async (req, res) => {
  const id = String(req.params.id);
  const session = sessions.get(id);
  if (session) {
    sessions.delete(id);
    await session.close();
  }
  res.json({ ok: true });
});

app.get("/api/study", (req, res) => {
  const seed = String(req.query.seed ?? "7");
  if (!/^-?\d+$/.test(seed)) {
    res.status(400).send("seed must be an integer");
    return;
  }
  const [cmd, ...base] = engineCommand();
  execFile(cmd, [...base, "gen-study", "--seed", seed], { maxBuffer: 64 * 1024 * 1024 }, (err, stdout) => {
    if (err) res.status(500).send(String(err));
    else res.type("text/csv").send(stdout);
  });
});

const port = Number(process.env.PORT ?? 8787);
app.listen(port, () => {
  console.log(`demo app on http://localhost:${port} (engine: ${engineCommand().join(" ")})`);
});
