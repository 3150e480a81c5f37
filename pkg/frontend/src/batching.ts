// Interval batcher for prompt points. Points queue locally and flush every
// `intervalMs` (50 ms matches the service's 20 Hz resampling). A failed
// flush puts the batch back at the front of the queue so nothing is lost
// across a disconnect; the connection-state callback drives the reconnect
// banner.

import type { WorldPoint } from "./types.js";

export type BatchSender<R> = (points: WorldPoint[]) => Promise<R>;

export class PointBatcher<R> {
  private queue: WorldPoint[] = [];
  private timer: ReturnType<typeof setInterval> | null = null;
  private inFlight = false;
  connected = true;
  onResult: ((result: R) => void) | null = null;
  onConnectionChange: ((connected: boolean) => void) | null = null;

  constructor(
    private readonly send: BatchSender<R>,
    private readonly intervalMs = 50,
  ) {}

  add(point: WorldPoint): void {
    this.queue.push(point);
  }

  pending(): number {
    return this.queue.length;
  }

  start(): void {
    if (this.timer === null) {
      this.timer = setInterval(() => void this.flush(), this.intervalMs);
    }
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  private setConnected(connected: boolean): void {
    if (connected !== this.connected) {
      this.connected = connected;
      this.onConnectionChange?.(connected);
    }
  }

  /** Send everything queued; resolves with the last batch's result. */
  async flush(): Promise<R | null> {
    if (this.inFlight || this.queue.length === 0) return null;
    this.inFlight = true;
    const batch = this.queue.splice(0, this.queue.length);
    try {
      const result = await this.send(batch);
      this.setConnected(true);
      this.onResult?.(result);
      return result;
    } catch {
      // Buffered resend: the batch goes back in order, ahead of anything
      // added while the request was in flight.
      this.queue.unshift(...batch);
      this.setConnected(false);
      return null;
    } finally {
      this.inFlight = false;
    }
  }

  /** Flush until the queue drains (used before finalizing a prompt). */
  async drain(): Promise<void> {
    while (this.queue.length > 0) {
      const result = await this.flush();
      if (result === null && !this.connected) {
        throw new Error("disconnected while draining prompt points");
      }
    }
  }
}
