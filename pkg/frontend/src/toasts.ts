/**
 * Error/info toast queue.  Service failures are surfaced with the server's
 * detail string; an ApiError from a region update also records which
 * region the rejection applies to so it can be shown inline.
 */

import { ApiError } from "./api.js";

export interface Toast {
  id: number;
  level: "error" | "info";
  message: string;
  /** Region id the message is anchored to, for inline display. */
  regionId?: string;
}

export class ToastQueue {
  private nextId = 1;
  readonly toasts: Toast[] = [];

  constructor(
    private readonly onChange: (toasts: Toast[]) => void = () => {},
  ) {}

  push(level: Toast["level"], message: string, regionId?: string): Toast {
    const toast: Toast = { id: this.nextId++, level, message, regionId };
    this.toasts.push(toast);
    this.onChange([...this.toasts]);
    return toast;
  }

  /** Surface any error; ApiError keeps the server's detail verbatim. */
  pushError(error: unknown, regionId?: string): Toast {
    const message = error instanceof ApiError
      ? error.detail
      : error instanceof Error ? error.message : String(error);
    return this.push("error", message, regionId);
  }

  dismiss(id: number): void {
    const index = this.toasts.findIndex((t) => t.id === id);
    if (index >= 0) {
      this.toasts.splice(index, 1);
      this.onChange([...this.toasts]);
    }
  }
}
