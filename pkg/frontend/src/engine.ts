/**
 * Engine transports. The recognizer runs out of process behind the
 * serve protocol: every event line in yields one frame out. Node code
 * talks to a child process directly; the browser goes through the
 * bridge server with the same frame format.
 */
import { spawn, type ChildProcessWithoutNullStreams } from "node:child_process";

import { FrameParser, type Frame } from "./protocol.js";

export interface EngineSession {
  /** Send one trace event line; resolves with the frame it produced. */
  send(line: string): Promise<Frame>;
  /** Replace the scene (snapshot lines) and reset recognition state. */
  loadScene(sceneLines: string[]): Promise<Frame>;
  close(): Promise<void>;
}

export function engineCommand(): string[] {
  const env = typeof process !== "undefined" ? process.env.TAPDRAG_CMD : undefined;
  return env ? env.split(" ") : ["python3", "-m", "tapdrag"];
}

interface Waiter {
  resolve: (frame: Frame) => void;
  reject: (err: Error) => void;
}

/** Child-process transport around `tapdrag serve`. Requests are strictly
 * ordered, so responses are matched FIFO. */
export class ServeProcess implements EngineSession {
  private parser = new FrameParser();
  private waiters: Waiter[] = [];
  private pendingFrames: Frame[] = [];
  private closed = false;

  private constructor(private child: ChildProcessWithoutNullStreams) {
    child.stdout.setEncoding("utf8");
    child.stdout.on("data", (chunk: string) => {
      for (const frame of this.parser.push(chunk)) {
        const waiter = this.waiters.shift();
        if (waiter) waiter.resolve(frame);
        else this.pendingFrames.push(frame);
      }
    });
    child.on("exit", () => {
      this.closed = true;
      for (const w of this.waiters.splice(0)) {
        w.reject(new Error("engine process exited"));
      }
    });
  }

  static async start(args: string[] = []): Promise<ServeProcess> {
    const [cmd, ...base] = engineCommand();
    const child = spawn(cmd, [...base, "serve", ...args], { stdio: "pipe" });
    const session = new ServeProcess(child);
    await session.nextFrame(); // initial frame with the starting scene
    return session;
  }

  private nextFrame(): Promise<Frame> {
    const ready = this.pendingFrames.shift();
    if (ready) return Promise.resolve(ready);
    if (this.closed) return Promise.reject(new Error("engine process exited"));
    return new Promise((resolve, reject) => this.waiters.push({ resolve, reject }));
  }

  send(line: string): Promise<Frame> {
    this.child.stdin.write(line + "\n");
    return this.nextFrame();
  }

  loadScene(sceneLines: string[]): Promise<Frame> {
    this.child.stdin.write("#scene\n" + sceneLines.map((l) => l + "\n").join("") + "#end\n");
    return this.nextFrame();
  }

  close(): Promise<void> {
    return new Promise((resolve) => {
      if (this.closed) return resolve();
      this.child.on("exit", () => resolve());
      this.child.stdin.write("#quit\n");
      this.child.stdin.end();
    });
  }
}
